"""Time stepping package"""
