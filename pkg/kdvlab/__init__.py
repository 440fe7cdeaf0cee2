"""KdV soliton stability laboratory"""
