"""
NC-Chern - Non-Commutative Chern Numbers of Disordered Lattice Models

This package computes even Chern numbers of Fermi projectors in momentum space,
in real space on finite volumes and through a Fredholm index, together with
localization diagnostics and numerical checks of the underlying identities.
"""

__version__ = "0.1.0"
__author__ = "NC-Chern Developers"
