"""
Motor de diferenciación automática en modo reverso.

Este módulo implementa una cinta (tape) vectorizada sobre arrays de numpy.
Cada primitiva calcula su valor hacia adelante, verifica que el resultado sea
finito y, si alguno de sus padres requiere gradiente, registra una función
de retropropagación. Los nodos se guardan en orden de creación, que ya es un
orden topológico, por lo que la retropropagación recorre la lista al revés.

Primitivas disponibles:
    - Aritméticas con broadcasting: suma, resta, mul, div, neg, matmul
    - Elementales: relu, tanh, exp, log, cuadrado, raiz, huber, recortar
    - Reducciones: sumar, media, minimo
    - Estructurales: concatenar, reformar, segmento, columnas
    - Para fracciones de cuantil: softmax, cumsum

Todos los valores son float64.

Examples:
    >>> cinta = Cinta()
    >>> p = cinta.variable([3.0])
    >>> perdida = cinta.sumar(cinta.cuadrado(p))
    >>> cinta.retropropagar(perdida)
    >>> p.grad
    array([6.])
"""

from __future__ import annotations

from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np


Retro = Callable[[np.ndarray], None]


class Nodo:
    """Valor intermedio de la cinta con su gradiente acumulado."""

    __slots__ = ("valor", "grad", "cinta", "requiere_grad", "op", "_retro")
    # ndarray (op) Nodo debe delegar en los operadores reflejados del Nodo
    __array_ufunc__ = None

    def __init__(self,
                 valor: np.ndarray,
                 cinta: "Cinta",
                 requiere_grad: bool = False,
                 op: str = "",
                 retro: Optional[Retro] = None):
        self.valor = valor
        self.grad: Optional[np.ndarray] = None
        self.cinta = cinta
        self.requiere_grad = requiere_grad
        self.op = op
        self._retro = retro

    @property
    def forma(self) -> Tuple[int, ...]:
        return self.valor.shape

    def __add__(self, otro):
        return self.cinta.suma(self, otro)

    def __radd__(self, otro):
        return self.cinta.suma(otro, self)

    def __sub__(self, otro):
        return self.cinta.resta(self, otro)

    def __rsub__(self, otro):
        return self.cinta.resta(otro, self)

    def __mul__(self, otro):
        return self.cinta.mul(self, otro)

    def __rmul__(self, otro):
        return self.cinta.mul(otro, self)

    def __truediv__(self, otro):
        return self.cinta.div(self, otro)

    def __rtruediv__(self, otro):
        return self.cinta.div(otro, self)

    def __neg__(self):
        return self.cinta.neg(self)

    def __matmul__(self, otro):
        return self.cinta.matmul(self, otro)

    def __repr__(self) -> str:
        return f"Nodo(op='{self.op}', forma={self.forma}, requiere_grad={self.requiere_grad})"


Operando = Union[Nodo, np.ndarray, float, int]


def _reducir_a_forma(g: np.ndarray, forma: Tuple[int, ...]) -> np.ndarray:
    """Suma las dimensiones que el broadcasting expandió."""
    if g.shape == forma:
        return g
    while g.ndim > len(forma):
        g = g.sum(axis=0)
    for eje, n in enumerate(forma):
        if n == 1 and g.shape[eje] != 1:
            g = g.sum(axis=eje, keepdims=True)
    return g


def _acumular(nodo: Nodo, g: np.ndarray) -> None:
    if not nodo.requiere_grad:
        return
    g = _reducir_a_forma(np.asarray(g, dtype=np.float64), nodo.valor.shape)
    nodo.grad = g if nodo.grad is None else nodo.grad + g


class Cinta:
    """
    Cinta de operaciones para diferenciación en modo reverso.

    Args:
        registrar (bool): Si False la cinta sólo evalúa hacia adelante y no
            guarda funciones de retropropagación. Se usa para la evaluación
            de redes fuera del entrenamiento.
    """

    def __init__(self, registrar: bool = True):
        self.registrar = registrar
        self._nodos: List[Nodo] = []

    def __len__(self) -> int:
        return len(self._nodos)

    # ------------------------------------------------------------------
    # Hojas
    # ------------------------------------------------------------------

    def variable(self, valor) -> Nodo:
        """Hoja diferenciable (parámetros)."""
        return Nodo(np.array(valor, dtype=np.float64), self, self.registrar, "variable")

    def constante(self, valor) -> Nodo:
        """Hoja sin gradiente."""
        return Nodo(np.asarray(valor, dtype=np.float64), self, False, "constante")

    def _como_nodo(self, x: Operando) -> Nodo:
        if isinstance(x, Nodo):
            return x
        return self.constante(x)

    def _crear(self, valor: np.ndarray, op: str, padres: Sequence[Nodo],
               retro: Retro) -> Nodo:
        valor = np.asarray(valor, dtype=np.float64)
        if not np.all(np.isfinite(valor)):
            raise FloatingPointError(f"resultado no finito en la primitiva '{op}'")
        requiere = self.registrar and any(p.requiere_grad for p in padres)
        nodo = Nodo(valor, self, requiere, op, retro if requiere else None)
        if requiere:
            self._nodos.append(nodo)
        return nodo

    # ------------------------------------------------------------------
    # Aritmética con broadcasting
    # ------------------------------------------------------------------

    def suma(self, a: Operando, b: Operando) -> Nodo:
        a, b = self._como_nodo(a), self._como_nodo(b)

        def retro(g):
            _acumular(a, g)
            _acumular(b, g)

        return self._crear(a.valor + b.valor, "suma", (a, b), retro)

    def resta(self, a: Operando, b: Operando) -> Nodo:
        a, b = self._como_nodo(a), self._como_nodo(b)

        def retro(g):
            _acumular(a, g)
            _acumular(b, -g)

        return self._crear(a.valor - b.valor, "resta", (a, b), retro)

    def mul(self, a: Operando, b: Operando) -> Nodo:
        a, b = self._como_nodo(a), self._como_nodo(b)

        def retro(g):
            _acumular(a, g * b.valor)
            _acumular(b, g * a.valor)

        return self._crear(a.valor * b.valor, "mul", (a, b), retro)

    def div(self, a: Operando, b: Operando) -> Nodo:
        a, b = self._como_nodo(a), self._como_nodo(b)
        with np.errstate(all="ignore"):
            valor = a.valor / b.valor

        def retro(g):
            _acumular(a, g / b.valor)
            _acumular(b, -g * a.valor / b.valor ** 2)

        return self._crear(valor, "div", (a, b), retro)

    def neg(self, a: Operando) -> Nodo:
        a = self._como_nodo(a)

        def retro(g):
            _acumular(a, -g)

        return self._crear(-a.valor, "neg", (a,), retro)

    def matmul(self, a: Operando, b: Operando) -> Nodo:
        a, b = self._como_nodo(a), self._como_nodo(b)
        assert a.valor.ndim == 2 and b.valor.ndim == 2, \
            "matmul requiere operandos bidimensionales"

        def retro(g):
            _acumular(a, g @ b.valor.T)
            _acumular(b, a.valor.T @ g)

        return self._crear(a.valor @ b.valor, "matmul", (a, b), retro)

    # ------------------------------------------------------------------
    # Funciones elementales
    # ------------------------------------------------------------------

    def relu(self, a: Operando) -> Nodo:
        a = self._como_nodo(a)
        mascara = a.valor > 0.0

        def retro(g):
            _acumular(a, g * mascara)

        return self._crear(np.where(mascara, a.valor, 0.0), "relu", (a,), retro)

    def tanh(self, a: Operando) -> Nodo:
        a = self._como_nodo(a)
        t = np.tanh(a.valor)

        def retro(g):
            _acumular(a, g * (1.0 - t * t))

        return self._crear(t, "tanh", (a,), retro)

    def exp(self, a: Operando) -> Nodo:
        a = self._como_nodo(a)
        with np.errstate(all="ignore"):
            e = np.exp(a.valor)

        def retro(g):
            _acumular(a, g * e)

        return self._crear(e, "exp", (a,), retro)

    def log(self, a: Operando) -> Nodo:
        a = self._como_nodo(a)
        with np.errstate(all="ignore"):
            valor = np.log(a.valor)

        def retro(g):
            _acumular(a, g / a.valor)

        return self._crear(valor, "log", (a,), retro)

    def cuadrado(self, a: Operando) -> Nodo:
        a = self._como_nodo(a)

        def retro(g):
            _acumular(a, 2.0 * g * a.valor)

        return self._crear(a.valor * a.valor, "cuadrado", (a,), retro)

    def raiz(self, a: Operando) -> Nodo:
        """Raíz cuadrada; el gradiente en 0 se toma igual a 0."""
        a = self._como_nodo(a)
        with np.errstate(all="ignore"):
            r = np.sqrt(a.valor)

        def retro(g):
            positivo = r > 0.0
            _acumular(a, np.where(positivo, 0.5 * g / np.where(positivo, r, 1.0), 0.0))

        return self._crear(r, "raiz", (a,), retro)

    def huber(self, a: Operando, kappa: float) -> Nodo:
        """L_κ(δ) = δ²/2 si |δ| ≤ κ, κ(|δ| − κ/2) en otro caso."""
        assert kappa > 0, "kappa debe ser positivo"
        a = self._como_nodo(a)
        absoluto = np.abs(a.valor)
        interior = absoluto <= kappa
        valor = np.where(interior, 0.5 * a.valor ** 2, kappa * (absoluto - 0.5 * kappa))

        def retro(g):
            _acumular(a, g * np.where(interior, a.valor, kappa * np.sign(a.valor)))

        return self._crear(valor, "huber", (a,), retro)

    def recortar(self, a: Operando, minimo: float, maximo: float) -> Nodo:
        a = self._como_nodo(a)
        dentro = (a.valor >= minimo) & (a.valor <= maximo)

        def retro(g):
            _acumular(a, g * dentro)

        return self._crear(np.clip(a.valor, minimo, maximo), "recortar", (a,), retro)

    # ------------------------------------------------------------------
    # Reducciones
    # ------------------------------------------------------------------

    def sumar(self, a: Operando, eje: Optional[int] = None,
              mantener: bool = False) -> Nodo:
        a = self._como_nodo(a)
        forma = a.valor.shape

        def retro(g):
            if eje is not None and not mantener:
                g = np.expand_dims(g, eje)
            _acumular(a, np.broadcast_to(g, forma))

        return self._crear(np.sum(a.valor, axis=eje, keepdims=mantener), "sumar", (a,), retro)

    def media(self, a: Operando, eje: Optional[int] = None) -> Nodo:
        a = self._como_nodo(a)
        n = a.valor.size if eje is None else a.valor.shape[eje]
        return self.mul(self.sumar(a, eje), 1.0 / n)

    def minimo(self, a: Operando, b: Operando) -> Nodo:
        """Mínimo elemento a elemento; los empates se asignan a `a`."""
        a, b = self._como_nodo(a), self._como_nodo(b)
        elige_a = a.valor <= b.valor

        def retro(g):
            _acumular(a, np.where(elige_a, g, 0.0))
            _acumular(b, np.where(elige_a, 0.0, g))

        return self._crear(np.minimum(a.valor, b.valor), "minimo", (a, b), retro)

    # ------------------------------------------------------------------
    # Estructura
    # ------------------------------------------------------------------

    def concatenar(self, nodos: Sequence[Operando], eje: int = -1) -> Nodo:
        nodos = [self._como_nodo(n) for n in nodos]
        cortes = np.cumsum([n.valor.shape[eje] for n in nodos])[:-1]

        def retro(g):
            for nodo, parte in zip(nodos, np.split(g, cortes, axis=eje)):
                _acumular(nodo, parte)

        valor = np.concatenate([n.valor for n in nodos], axis=eje)
        return self._crear(valor, "concatenar", nodos, retro)

    def reformar(self, a: Operando, forma: Tuple[int, ...]) -> Nodo:
        a = self._como_nodo(a)

        def retro(g):
            _acumular(a, g.reshape(a.valor.shape))

        return self._crear(a.valor.reshape(forma), "reformar", (a,), retro)

    def segmento(self, a: Operando, inicio: int, forma: Tuple[int, ...]) -> Nodo:
        """Vista con forma `forma` de un tramo del vector plano `a`."""
        a = self._como_nodo(a)
        n = int(np.prod(forma))

        def retro(g):
            completo = np.zeros_like(a.valor)
            completo[inicio:inicio + n] = g.ravel()
            _acumular(a, completo)

        return self._crear(a.valor[inicio:inicio + n].reshape(forma), "segmento", (a,), retro)

    def columnas(self, a: Operando, inicio: int, fin: int) -> Nodo:
        """Corte a[..., inicio:fin] sobre el último eje."""
        a = self._como_nodo(a)

        def retro(g):
            completo = np.zeros_like(a.valor)
            completo[..., inicio:fin] = g
            _acumular(a, completo)

        return self._crear(a.valor[..., inicio:fin], "columnas", (a,), retro)

    # ------------------------------------------------------------------
    # Fracciones de cuantil
    # ------------------------------------------------------------------

    def softmax(self, a: Operando, eje: int = -1) -> Nodo:
        a = self._como_nodo(a)
        desplazado = a.valor - np.max(a.valor, axis=eje, keepdims=True)
        e = np.exp(desplazado)
        s = e / np.sum(e, axis=eje, keepdims=True)

        def retro(g):
            _acumular(a, s * (g - np.sum(g * s, axis=eje, keepdims=True)))

        return self._crear(s, "softmax", (a,), retro)

    def cumsum(self, a: Operando, eje: int = -1) -> Nodo:
        a = self._como_nodo(a)

        def retro(g):
            _acumular(a, np.flip(np.cumsum(np.flip(g, eje), axis=eje), eje))

        return self._crear(np.cumsum(a.valor, axis=eje), "cumsum", (a,), retro)

    # ------------------------------------------------------------------
    # Retropropagación
    # ------------------------------------------------------------------

    def retropropagar(self, salida: Nodo) -> None:
        """
        Propaga ∂salida/∂(·) hacia todas las hojas variables.

        Raises:
            ValueError: Si la salida no es escalar.
        """
        if salida.valor.size != 1:
            raise ValueError(
                f"la salida a retropropagar debe ser escalar, forma {salida.valor.shape}")
        if not salida.requiere_grad:
            return
        salida.grad = np.ones_like(salida.valor)
        for nodo in reversed(self._nodos):
            if nodo.grad is not None and nodo._retro is not None:
                nodo._retro(nodo.grad)
