"""Trees of minimal atom-bond connectivity index: exhaustive and
degree-sequence searches, a structural theorem checker, and a catalogue of
the inequalities behind the structural results."""

from .errors import MinAbcError
from .graph import DegreeSequence, Tree, decode_graph6, encode_graph6, from_edges
from .metric import abc_index, edge_f

__version__ = "0.1.0"

__all__ = [
    "DegreeSequence",
    "MinAbcError",
    "Tree",
    "abc_index",
    "decode_graph6",
    "edge_f",
    "encode_graph6",
    "from_edges",
]
