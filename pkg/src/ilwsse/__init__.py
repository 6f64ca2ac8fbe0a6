"""Semiclassical soliton ensembles for the intermediate long wave equation.

Subpackages and modules:

* ``specfun``: Lambert W branches and the quadratrix spectral curve
* ``profile``: admissible initial data, turning points, Burgers solution
* ``scattering``: Weyl law, tail integrals, modified scattering data
* ``ensemble``: the N-soliton partition function and field in ball arithmetic
* ``equilibrium``: the log-potential energy problem and its minimizer
* ``pde``: a pseudospectral split-step ILW solver
* ``mtp``: the model turning-point equation and its Airy asymptotics
* ``service`` / ``cli``: HTTP service and command-line client
"""

__version__ = "0.1.0"
