"""One test per acceptance criterion; each prints its measured evidence."""

from skewlab.suite import CHECKS, run_check


def check(number):
    res = run_check(number)
    print(res.line())
    assert res.passed, res.line()


def test_01_base_pressure_exactness():
    check(1)


def test_02_signed_walk_reproduction():
    check(2)


def test_03_tilting_homomorphism():
    check(3)


def test_04_polya_dichotomy_surrogate():
    check(4)


def test_05_positive_null_dichotomy():
    check(5)


def test_06_product_structure():
    check(6)


def test_07_coboundary_exactness():
    check(7)


def test_08_renewal_identity():
    check(8)


def test_09_symmetric_on_average():
    check(9)


def test_10_cogrowth():
    check(10)


def test_11_gibbs_certificate():
    check(11)


def test_12_gradient_and_convexity():
    check(12)


def test_every_criterion_has_a_test():
    assert sorted(CHECKS) == list(range(1, 13))


def test_corrupted_pressure_is_caught():
    res = run_check(11, pressure_offset=0.1)
    print(res.line())
    assert not res.passed
