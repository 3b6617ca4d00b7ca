"""uamcas: deterministic fast-time simulation of an urban-air-mobility
collision-avoidance system against non-cooperative intruders."""

__version__ = "0.1.0"
