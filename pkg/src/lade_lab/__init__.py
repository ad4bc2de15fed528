"""lade-lab - a label-shift classification laboratory.

Post-compensation, the LADE/LADER losses and a calibration suite, verified
against exact Bayes posteriors on synthetic long-tailed Gaussian mixtures.
"""

__version__ = "0.1.0"
