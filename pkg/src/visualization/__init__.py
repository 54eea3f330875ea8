"""
Visualization package for training curves, kernels and image dumps
"""
