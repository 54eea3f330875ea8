"""
Dataset package: IDX files, reference probes and ground truths
"""
