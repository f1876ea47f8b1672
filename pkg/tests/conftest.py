"""
Configuración compartida de pytest: raíz del proyecto en sys.path y
fixtures comunes.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

PROJECT_DIR = Path(__file__).resolve().parent.parent
if str(PROJECT_DIR) not in sys.path:
    sys.path.insert(0, str(PROJECT_DIR))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def diferencias_finitas(f, x, h=1e-6):
    """Gradiente central de una función escalar de un vector."""
    x = np.array(x, dtype=np.float64)
    grad = np.zeros_like(x)
    for i in range(x.size):
        mas, menos = x.copy(), x.copy()
        mas.flat[i] += h
        menos.flat[i] -= h
        grad.flat[i] = (f(mas) - f(menos)) / (2.0 * h)
    return grad
