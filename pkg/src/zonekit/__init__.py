"""Voronoi and zone diagrams in l_p planes, computed as ray fans."""

__version__ = "0.1.0"
