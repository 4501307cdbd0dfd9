"""Tree Mover's Distances between attributed graphs and TMD-based generalization bounds."""

__version__ = "0.1.0"
