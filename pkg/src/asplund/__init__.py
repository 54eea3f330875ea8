"""
Asplund distance package
"""
