"""Inicialización del paquete de distribuciones s-iteradas."""

__version__ = "0.1.0"
