"""
Source package for the logarithmic morphology toolkit
"""
