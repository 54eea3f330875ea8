"""
LIP arithmetic package for grey levels bounded by M
"""
