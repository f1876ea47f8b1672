"""
Imitación por observaciones con recompensa adversarial de transiciones y
SAC distribucional.

Este paquete contiene el motor numérico (cinta de diferenciación, MLP, Adam),
los entornos de escritorio, el aprendiz de recompensa, el crítico de
cuantiles, las medidas de riesgo, el actor, los entrenadores y los
diagnósticos.
"""

__version__ = '0.1.0'
