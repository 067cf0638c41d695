# Sim module – channel model and Monte-Carlo sweeps.
