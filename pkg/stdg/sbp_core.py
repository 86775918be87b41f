"""
Legendre-Gauss-Lobatto (LGL) quadrature and the collocated summation-by-parts
(SBP) derivative operators built on it, plus the split-form identities of the
SBP operator as testable kernels.


Copyright 2024 stdg contributors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
"""
from dataclasses import dataclass
import functools

import numpy as np

MAX_DEGREE = 20
_NEWTON_TOL = 1e-15
_NEWTON_MAX_ITER = 50


@dataclass(frozen=True, eq=False)
class SbpOperator:
    """
    LGL nodes and weights with the mass, derivative, Q and boundary matrices
    for one polynomial degree. Instances are immutable (all arrays are
    read-only) and may be shared between threads.

    Attributes:
        degree: Polynomial degree K; the rule has K+1 nodes
        nodes: Nodes in [-1, 1], strictly increasing, endpoints included
        weights: Positive quadrature weights, summing to 2
        D: Nodal derivative matrix
        M: Diagonal mass matrix diag(weights)
        Q: M @ D, satisfying Q + Q^T = B
        B: Boundary matrix diag(-1, 0, ..., 0, 1)
        barycentric_weights: Weights of the barycentric interpolation formula
    """
    degree: int
    nodes: np.ndarray
    weights: np.ndarray
    D: np.ndarray
    M: np.ndarray
    Q: np.ndarray
    B: np.ndarray
    barycentric_weights: np.ndarray

    @property
    def size(self) -> int:
        return self.degree + 1


def _legendre_pair(
        degree: int, x: np.ndarray
        ) -> tuple[np.ndarray, np.ndarray]:
    """
    Returns P_K(x) and P_{K-1}(x), evaluated with the three-term recursion
    """
    p_previous = np.ones_like(x)
    p_current = x.copy()
    for k in range(2, degree + 1):
        p_previous, p_current = (
            p_current,
            ((2 * k - 1) * x * p_current - (k - 1) * p_previous) / k,
        )
    return p_current, p_previous


def _lgl_nodes(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Newton iteration for the zeros of (1 - x^2) P'_K(x), starting from the
    Chebyshev-Gauss-Lobatto points. Returns the nodes and P_K at the nodes.
    """
    x = -np.cos(np.pi * np.arange(degree + 1) / degree)
    for _ in range(_NEWTON_MAX_ITER):
        p_k, p_km1 = _legendre_pair(degree, x)
        x_old = x
        x = x_old - (x_old * p_k - p_km1) / ((degree + 1) * p_k)
        if np.max(np.abs(x - x_old)) < _NEWTON_TOL:
            break

    # The rule is symmetric and contains the endpoints exactly
    x = 0.5 * (x - x[::-1])
    x[0], x[-1] = -1.0, 1.0
    p_k, _ = _legendre_pair(degree, x)
    return x, p_k


def _barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    differences = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(differences, 1.0)
    return 1.0 / np.prod(differences, axis=1)


def _derivative_matrix(
        nodes: np.ndarray, barycentric_weights: np.ndarray
        ) -> np.ndarray:
    differences = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(differences, 1.0)
    D = (barycentric_weights[None, :] / barycentric_weights[:, None]) \
        / differences
    np.fill_diagonal(D, 0.0)
    # Negative sum trick: rows of D annihilate constants to round-off
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def _read_only(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@functools.lru_cache(maxsize=None)
def lgl_rule(degree: int) -> SbpOperator:
    """
    Construct the LGL quadrature rule and SBP operator of the given degree

    Args:
        degree: The polynomial degree K, 1 <= K <= 20

    Returns:
        The SBP operator. Results are cached, since operators are immutable

    Raises:
        ValueError: In case the degree is out of range
    """
    if isinstance(degree, bool) or not isinstance(degree, (int, np.integer)) \
            or not 1 <= degree <= MAX_DEGREE:
        raise ValueError(
            f'The LGL degree must be an integer in [1, {MAX_DEGREE}], got '
            f'{degree!r}'
        )
    degree = int(degree)

    nodes, p_k = _lgl_nodes(degree)
    weights = 2.0 / (degree * (degree + 1) * p_k ** 2)
    barycentric_weights = _barycentric_weights(nodes)
    D = _derivative_matrix(nodes, barycentric_weights)
    M = np.diag(weights)
    Q = M @ D
    B = np.zeros((degree + 1, degree + 1))
    B[0, 0], B[-1, -1] = -1.0, 1.0

    return SbpOperator(
        degree=degree,
        nodes=_read_only(nodes),
        weights=_read_only(weights),
        D=_read_only(D),
        M=_read_only(M),
        Q=_read_only(Q),
        B=_read_only(B),
        barycentric_weights=_read_only(barycentric_weights),
    )


def interpolation_matrix(
        rule: SbpOperator, targets: np.ndarray | list[float]
        ) -> np.ndarray:
    """
    Returns the matrix that maps nodal values of the rule to the values of
    the degree-K interpolant at the targets (barycentric formula). Rows of
    targets that coincide with a node select that node exactly.
    """
    targets = np.atleast_1d(np.asarray(targets, dtype=float))
    differences = targets[:, None] - rule.nodes[None, :]
    exact = differences == 0.0
    differences[exact] = 1.0
    terms = rule.barycentric_weights[None, :] / differences
    matrix = terms / terms.sum(axis=1, keepdims=True)

    on_node = exact.any(axis=1)
    matrix[on_node] = exact[on_node].astype(float)
    return matrix


def lagrange_eval(
        rule: SbpOperator, nodal_values: np.ndarray, xi: float
        ) -> float | np.ndarray:
    """
    Evaluate the interpolant of the nodal values at xi in [-1, 1]

    Args:
        rule: The rule whose nodes the values belong to
        nodal_values: Array with the node axis first (trailing axes allowed)
        xi: The evaluation point

    Returns:
        The interpolated value (an array if nodal_values has trailing axes)
    """
    row = interpolation_matrix(rule, [xi])[0]
    result = np.tensordot(row, np.asarray(nodal_values, dtype=float), axes=1)
    return float(result) if np.ndim(result) == 0 else result


def quadrature(
        rule: SbpOperator, values: np.ndarray, axis: int = -1
        ) -> float | np.ndarray:
    """Σ ω_i values_i along the given node axis"""
    values = np.moveaxis(np.asarray(values, dtype=float), axis, -1)
    result = values @ rule.weights
    return float(result) if np.ndim(result) == 0 else result


def split_form_identities(
        rule: SbpOperator, a: np.ndarray, b: np.ndarray, c: np.ndarray
        ) -> tuple[float, float, float]:
    """
    Evaluate both sides of the three split-form identities of the SBP
    operator, with [[a]]_(i,j) = a_i - a_j and {{b}}_(i,j) = (b_i + b_j)/2:

        Σ Q_ij [[a]]             = -a|
        Σ Q_ij [[a]] {{b}}       = Σ Q_ij a_i b_j - ab| = -Σ Q_ij a_j b_i
        Σ Q_ij [[a]] {{b}} {{c}} = -1/2 Σ Q_ij a_j b_i c_j
                                   + 1/2 Σ Q_ij a_i b_i c_j
                                   - 1/2 Σ Q_ij a_j b_i c_i

    where x| is x_K - x_0.

    Returns:
        The absolute residuals of the three identities (for the second, the
        largest deviation between the three expressions)

    Raises:
        ValueError: In case a vector does not have K+1 entries
    """
    vectors = [np.asarray(v, dtype=float) for v in (a, b, c)]
    for name, vector in zip('abc', vectors):
        if vector.shape != (rule.size,):
            raise ValueError(
                f'Vector {name} has shape {vector.shape}, expected '
                f'({rule.size},)'
            )
    a, b, c = vectors
    Q = rule.Q

    def boundary(values):
        return values[-1] - values[0]

    jump_a = a[:, None] - a[None, :]
    avg_b = 0.5 * (b[:, None] + b[None, :])
    avg_c = 0.5 * (c[:, None] + c[None, :])

    residual_1 = abs(np.sum(Q * jump_a) + boundary(a))

    lhs_2 = np.sum(Q * jump_a * avg_b)
    middle_2 = a @ Q @ b - boundary(a * b)
    right_2 = -(b @ Q @ a)
    residual_2 = max(abs(lhs_2 - middle_2), abs(lhs_2 - right_2))

    lhs_3 = np.sum(Q * jump_a * avg_b * avg_c)
    rhs_3 = (
        -0.5 * (b @ Q @ (a * c))
        + 0.5 * ((a * b) @ Q @ c)
        - 0.5 * ((b * c) @ Q @ a)
    )
    residual_3 = abs(lhs_3 - rhs_3)

    return float(residual_1), float(residual_2), float(residual_3)
