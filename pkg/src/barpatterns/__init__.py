"""Bar-chart pattern detection, breakout confirmation and true/false backtests."""

__version__ = "0.1.0"
