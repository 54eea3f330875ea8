"""
Command line package
"""
