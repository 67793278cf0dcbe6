"""Knowledge-conditioned, numerically grounded LSTM language models with
typing-simulation evaluation (word prediction and word completion)."""

__version__ = "0.1.0"
