"""Moving frames for integral curves in generalized flag varieties.

Exact graded Lie algebras (sl, so/sp, split G2), symmetry algebras of flat
curves, normalization spaces, numerical frame reduction with Wilczynski-type
invariants, compatibility with bilinear forms and G2 three-forms, and an ODE
front end.
"""
from .algebra import (AlgebraElement, GradedAlgebra, GradedSubspace, bracket, build_g2, build_sl_flag,
                      build_slb, killing, principal_sl)
from .octonions import derivations, split_octonions
from .structure import complete_sl2, filtration, h1_plus, h_filtration, symmetry_algebra
from .normalization import (generic_complement, invariant_complement_certificate, is_invariant,
                            reductive_invariant_complement)
from .frames import (ProjectiveCurve, maurer_cartan_pullback, osculating_frame, projective_invariants,
                     reduce_to_normal_form, sl_normalize, wilczynski_theta3)
from .duality import (classify_cubic, find_compatible_bilinear, find_compatible_three_form,
                      g2_case_report)

__version__ = "0.1.0"
