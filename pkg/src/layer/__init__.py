"""
Trainable layer package: the Asplund distance layer and its checkpoints
"""
