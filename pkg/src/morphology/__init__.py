"""
Morphology package: probes and classical / logarithmic operators
"""
