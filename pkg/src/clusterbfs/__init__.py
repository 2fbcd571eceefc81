"""Cluster-BFS and landmark distance oracles."""
