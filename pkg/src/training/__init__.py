"""
Training package: losses, optimisers, probe errors and the training loop
"""
