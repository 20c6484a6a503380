"""Toolkit for generalized arithmetic progressions in F_p that contain large product sets."""

from .core_arith import (FieldElement, IntMatrix, IntPolynomial, char_poly, det_adjugate_mod,
                         eval_poly_mod, height, inv_mod, sqrt_mod)
from .decompose import (CoverWitness, DecompositionTable, cover_witness, decompose,
                        decompose_products)
from .errors import *  # noqa: F401,F403
from .gap import (Gap, contains_product, difference_gap, enumerate_gap, is_isolated, is_proper,
                  sumset_scale)
from .instances import (Instance, InstanceSpec, gen_degenerate, gen_general, gen_matrix,
                        gen_quadratic, gen_random, generate)
from .matrix_ring import MatGap, mat_decompose, recover_matrix_generators, verify_matrix_poly
from .oracles import MinPolyResult, minpoly_bounded, mult_energy
from .recovery import (RecoveryConfig, RecoveryReport, bounded_left_nullvector,
                       recover_generators, recover_rank2, symmetrize)

__version__ = "0.1.0"
