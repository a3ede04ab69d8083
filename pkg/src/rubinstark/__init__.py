"""rubinstark: exact and high-precision verification of equivariant
class-number identities for abelian extensions of Q.

The package is organised bottom-up:

* ``_kernels``   -- integer matrix normal forms (HNF/SNF), compiled + pure;
* ``rationals``  -- scalar layer (gmpy2.mpq when present, Fraction otherwise);
* ``groups``     -- finite abelian groups, subgroups, characters;
* ``cyclo``      -- exact cyclotomic arithmetic for character values;
* ``groupring``  -- Z[G] / Q[G] / C[G] elements, idempotents, Stickelberger
  style operators;
* ``lattices``   -- G-stable lattices, equivariant indices, exterior powers;
* ``numberfield`` -- elements of abelian fields as polynomials mod minpoly;
* ``arithdata``  -- places, ramification, vanishing orders, subfield data;
* ``lvalues``    -- Dirichlet L-functions and their S,T-modified leading terms;
* ``regulator``  -- logarithmic embeddings and equivariant regulators;
* ``instances``  -- packaged arithmetic test fields and their validation;
* ``stark``      -- recognition of the unit predicted by the leading term;
* ``verify``     -- the three verification pipelines and report assembly;
* ``cli``        -- the ``rubinstark`` command line tool.
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
