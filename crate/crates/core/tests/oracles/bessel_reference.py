# Extended-precision reference values for the Bessel tests (mpmath, 50 digits).
# Output is pasted into tests/specfun_reference.rs.
import mpmath as mp
mp.mp.dps = 50

cases = [(0, 1e-6), (0, 0.3), (0, 1.0), (0, 2.404825557695773), (0, 10.0), (0, 37.5), (0, 200.0),
         (1, 1e-4), (1, 0.7), (1, 5.5), (1, 63.0), (1, 199.0),
         (2, 0.05), (3, 1.7), (5, 12.0), (7, 0.9), (10, 3.0), (12, 150.0),
         (20, 18.0), (25, 30.0), (40, 45.0), (60, 80.0), (60, 200.0), (30, 5.0)]
print("pub const JY_CASES: &[(u32, f64, f64, f64, f64, f64)] = &[")
for m, x in cases:
    x = mp.mpf(x)
    j = mp.besselj(m, x); y = mp.bessely(m, x)
    jp = mp.besselj(m, x, derivative=1); yp = mp.bessely(m, x, derivative=1)
    print(f"    ({m}, {mp.nstr(x, 17)}, {mp.nstr(j, 20)}, {mp.nstr(y, 20)}, {mp.nstr(jp, 20)}, {mp.nstr(yp, 20)}),")
print("];")
print("pub const K0_CASES: &[(f64, f64)] = &[")
for r in [0.01, 0.25, 1.0, 2.0, 3.5]:
    print(f"    ({r}, {mp.nstr(mp.besselk(0, r), 20)}),")
print("];")
print("pub const J0_FIRST_ZERO: f64 = %s;" % mp.nstr(mp.besseljzero(0, 1), 20))
# complex-argument checks: J_m, Y_m at w = 1.3+0.8i and w = 2.2i
print("pub const COMPLEX_CASES: &[(u32, f64, f64, f64, f64, f64, f64)] = &[")
for m in [0, 1, 4, 9]:
    for w in [mp.mpc(1.3, 0.8), mp.mpc(0, 2.2), mp.mpc(-0.6, 1.5)]:
        j = mp.besselj(m, w); y = mp.bessely(m, w)
        print(f"    ({m}, {mp.nstr(w.real, 17)}, {mp.nstr(w.imag, 17)}, {mp.nstr(j.real, 20)}, {mp.nstr(j.imag, 20)}, {mp.nstr(y.real, 20)}, {mp.nstr(y.imag, 20)}),")
print("];")
# spherical j_l, h_l^(1) at complex and negative real arguments
def sj(l, w): return mp.sqrt(mp.pi/(2*w))*mp.besselj(l+mp.mpf(1)/2, w)
def sy(l, w): return mp.sqrt(mp.pi/(2*w))*mp.bessely(l+mp.mpf(1)/2, w)
print("pub const SPHERICAL_CASES: &[(u32, f64, f64, f64, f64, f64, f64)] = &[")
for l in [0, 1, 3, 8, 15]:
    for w in [mp.mpc(0.2, 0), mp.mpc(2.5, 0), mp.mpc(0, 1.8), mp.mpc(1.1, 0.4), mp.mpc(7.0, 0)]:
        j = sj(l, w); h = j + 1j*sy(l, w)
        print(f"    ({l}, {mp.nstr(w.real, 17)}, {mp.nstr(w.imag, 17)}, {mp.nstr(j.real, 20)}, {mp.nstr(j.imag, 20)}, {mp.nstr(h.real, 20)}, {mp.nstr(h.imag, 20)}),")
print("];")
