"""Machine-generated Taylor coefficients for the scaled-limit gain integrand.

g0..g6 are the coefficients of h(x, x-u) expanded in u = x - y; they
close the guard strip next to the diagonal where the direct form loses
all significant digits to the quartic cancellation.  Regenerate with a
computer-algebra pass over the integrand rather than editing by hand.
"""
import numpy as np


def gmu_diag_coeffs(x, mu):
    """Taylor coefficients g0..g6 of h(x, x-u) in u."""
    x0 = x**12
    x1 = x**2
    x2 = x**4
    x3 = x**6
    x4 = x**8
    x5 = x**10
    x6 = 16*x
    x7 = mu**2
    x8 = mu**4
    x9 = x**3
    x10 = 16*x9
    x11 = x1*x7
    x12 = x**14
    x13 = x2*x7
    x14 = x**16
    x15 = 240*x
    x16 = mu**6
    x17 = 720*x9
    x18 = x**5
    x19 = 720*x18
    x20 = x**7
    x21 = 240*x20
    x22 = x1*x8
    x23 = x**18
    x24 = 630*x4
    x25 = x3*x7
    x26 = x**20
    x27 = 5040*x
    x28 = mu**8
    x29 = 25200*x9
    x30 = 50400*x18
    x31 = 50400*x20
    x32 = x**9
    x33 = 25200*x32
    x34 = x**11
    x35 = 5040*x34
    x36 = x2*x8
    x37 = x1*x16
    x38 = x**22
    x39 = 45360*x5
    x40 = 7560*x0
    x41 = x4*x7
    x42 = 75600*x
    x43 = 529200*x9
    x44 = 1587600*x18
    x45 = 2646000*x20
    x46 = 2646000*x32
    x47 = 1587600*x34
    x48 = 529200*x**13
    x49 = 75600*x**15
    return ((4/3)*(-38*x1 + x10*x7 - x10 + 44*x11 + 3*x2 + x6*x7 - x6 - 32*x7 + 22*x8 + 13)/(x0 + 6*x1 + 15*x2 + 20*x3 + 15*x4 + 6*x5 + 1), (8/45)*x*(-290*x1 + 416*x11 - 120*x13 + 183*x2 - 1228*x7 + 726*x8 + 565)/(7*x0 + 7*x1 + x12 + 21*x2 + 35*x3 + 35*x4 + 21*x5 + 1), -4/45*(-2367*x1 + 5716*x11 - 2048*x13 - x15*x7 + x15 + 284*x16 - x17*x7 + x17 - x19*x7 + x19 + 1751*x2 - x21*x7 + x21 - 3394*x22 - 183*x3 - 424*x7 + 10*x8 + 199)/(28*x0 + 8*x1 + 8*x12 + x14 + 28*x2 + 56*x3 + 70*x4 + 56*x5 + 1), (32/945)*x*(15253*x1 - 30688*x11 + 2968*x13 - 4686*x16 - 2779*x2 + 14490*x22 - x24*x7 + x24 - 2520*x25 + 2961*x3 + 5254*x7 + 1092*x8 - 2353)/(84*x0 + 9*x1 + 36*x12 + 9*x14 + 36*x2 + x23 + 84*x3 + 126*x4 + 126*x5 + 1), (4/945)*(-77140*x1 + 131306*x11 - 336546*x13 + 9212*x16 + 174937*x2 + 67284*x22 + 55650*x25 + x27*x7 - x27 + 1266*x28 + x29*x7 - x29 - 63294*x3 + x30*x7 - x30 + x31*x7 - x31 + x33*x7 - x33 + x35*x7 - x35 + 142394*x36 - 129976*x37 + 1743*x4 - 3190*x7 - 9038*x8 + 3052)/(210*x0 + 10*x1 + 120*x12 + 45*x14 + 45*x2 + 10*x23 + x26 + 120*x3 + 210*x4 + 252*x5 + 1), (8/2835)*x*(-231432*x1 + 322776*x11 - 733656*x13 + 104304*x16 + 502803*x2 + 398832*x22 - 79940*x25 + 15614*x28 + 55370*x3 + 193998*x36 - 493956*x37 - x39*x7 + x39 + 112455*x4 - x40*x7 + x40 - 113400*x41 - 26800*x7 - 122958*x8 + 39290)/(462*x0 + 11*x1 + 330*x12 + 165*x14 + 55*x2 + 55*x23 + 11*x26 + 165*x3 + x38 + 330*x4 + 462*x5 + 1), -4/14175*(1852*mu**10 - 700458*x1*x28 - 1209840*x1 + 48440*x11 - 4668416*x13 + 10233016*x16*x2 + 125332*x16 + 5402895*x2 + 5940218*x22 + 6254500*x25 + 44910*x28 - 943810*x3*x8 - 5067405*x3 - 11210570*x36 - 4290460*x37 + 794325*x4 - 495180*x41 - x42*x7 + x42 - x43*x7 + x43 - x44*x7 + x44 - x45*x7 + x45 - x46*x7 + x46 - x47*x7 + x47 - x48*x7 + x48 - x49*x7 + x49 + 38535*x5 + 26996*x7 - 213790*x8 + 28350)/(x**24 + 924*x0 + 12*x1 + 792*x12 + 495*x14 + 66*x2 + 220*x23 + 66*x26 + 220*x3 + 12*x38 + 495*x4 + 792*x5 + 1))
