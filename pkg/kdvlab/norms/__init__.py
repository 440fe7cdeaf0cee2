"""Space-time norms package"""
