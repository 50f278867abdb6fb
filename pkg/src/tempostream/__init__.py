"""tempostream: streaming-perception simulation, metrics, and a
delay-adaptive multi-horizon forecasting detector at desk scale."""

__version__ = "0.1.0"
