"""Unit conventions.

Everything is natural units (hbar = c = 1) with masses and rates expressed
as angular frequencies in s^-1. A mass of 1 MeV corresponds to
1.519267e21 s^-1.
"""

MEV_IN_INV_S = 1.519267e21
NUCLEON_MASS_MEV = 939.565
NUCLEON_MASS = NUCLEON_MASS_MEV * MEV_IN_INV_S

# reference collapse rates in s^-1
LAMBDA_GRW = 1e-16
LAMBDA_ADLER = 1e-8
ADLER_BAND = (1e-10, 1e-6)


def mev_to_inv_s(mev):
    return mev * MEV_IN_INV_S


def inv_s_to_mev(rate):
    return rate / MEV_IN_INV_S
