"""Battery degradation cost of a day's state-of-charge trace."""
