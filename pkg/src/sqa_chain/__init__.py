"""Simulated quantum annealing on random transverse-field Ising chains.

Library layout:

* :mod:`sqa_chain.instances`  -- random chain instances and their file format
* :mod:`sqa_chain.fermion`    -- exact free-fermion reference solver
  (equilibrium correlators and coherent annealing dynamics)
* :mod:`sqa_chain.pimc`       -- path-integral Monte Carlo core
* :mod:`sqa_chain.annealing`  -- annealing schedules and SQA drivers
* :mod:`sqa_chain.analysis`   -- effective-temperature / exponent fits
* :mod:`sqa_chain.sweep`      -- deterministic parameter-sweep executor
* :mod:`sqa_chain.figures`    -- figure-data pipelines (CSV emitters)
* :mod:`sqa_chain.cli`        -- command line front end
"""

__version__ = "0.1.0"
