from .click_matrix import ClickMatrix, HeldoutPair
from .network import TENSOR_NAMES, ForwardTape, MlpParams, VaeParams
from .ranking import RankingResult
from .sparse_code import SparseCodeState

__all__ = [
    "TENSOR_NAMES",
    "ClickMatrix",
    "ForwardTape",
    "HeldoutPair",
    "MlpParams",
    "RankingResult",
    "SparseCodeState",
    "VaeParams",
]
