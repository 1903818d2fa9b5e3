"""Two-level operators in the basis (|g>, |e>) = (index 0, index 1)."""
from src.modules.linalg.core import as_operator, basis

GROUND = basis(2, 0)
EXCITED = basis(2, 1)

SIGMA_MINUS = as_operator([[0, 1], [0, 0]])  # |g><e|
SIGMA_X = as_operator([[0, 1], [1, 0]])
SIGMA_Y = as_operator([[0, -1j], [1j, 0]])
SIGMA_Z = as_operator([[-1, 0], [0, 1]])  # |e><e| - |g><g|
