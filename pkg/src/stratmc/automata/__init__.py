"""Word and tree automata, parity games and the constructions linking them."""

from . import pbf
from .budget import Budget, DEFAULT_CAP
from .ltl import (BuchiWordAutomaton, eval_lasso, ltl_to_nbw, nbw_accepts_lasso,
                  nnf)
from .parity import ParityGame, parity_solve
from .safra import ParityWordAutomaton, nbw_to_dpw
from .tree import (Dual, ExplicitTreeAutomaton, Narrowed, Nondeterminized,
                   Projected, RegularTree, accepts_regular, dump_automaton,
                   narrow, project, remove_alternation, tree_emptiness)
