"""Information flow and GARCH-family volatility on minute-level market data."""
__version__ = "0.1.0"
