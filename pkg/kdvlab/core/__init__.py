"""Core utilities package"""
