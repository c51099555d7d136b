import numpy as np
import pytest

from conftest import random_p1_system, random_quadratic
from slemma import certificate as cert
from slemma import geometry as geo
from slemma.implication import find_counterexample
from slemma.quadratic import QuadraticFunction
from slemma.rng import SplitMix64
from slemma.systems import FunctionSystem


def _norm_sq(n):
    return QuadraticFunction(2 * np.eye(n), np.zeros(n), 0.0)


def test_verify_equal_functions():
    system = FunctionSystem(2, _norm_sq(2), (_norm_sq(2),))
    ver = cert.verify_certificate_quadratic(system, [1.0])
    assert ver.valid
    assert ver.lambda_min == pytest.approx(0.0, abs=1e-12)


def test_verify_example3_zero_alpha_invalid(example3):
    ver = cert.verify_certificate_quadratic(example3, [0.0])
    assert not ver.valid
    assert ver.lambda_min < -1.0


def test_verify_invalid_with_dehomogenized_witness():
    # f0 = x^2, f1 = 1: with alpha 1 the combination is x^2 - 1, minimum -1 at 0
    f0 = QuadraticFunction([[2.0]], [0.0], 0.0)
    one = QuadraticFunction([[0.0]], [0.0], 1.0)
    system = FunctionSystem(1, f0, (one,))
    ver = cert.verify_certificate_quadratic(system, [1.0])
    assert not ver.valid
    assert ver.violating_x is not None
    assert ver.violating_x[0] == pytest.approx(0.0, abs=1e-8)


def test_negative_multiplier_rejected(example3):
    with pytest.raises(cert.NegativeMultiplier):
        cert.verify_certificate_quadratic(example3, [-0.5])


def test_sampled_verification_positive_expression():
    from slemma.expr import parse
    system = FunctionSystem(1, parse("exp(x1)", 1), ())
    ver = cert.verify_certificate_sampled(system, [], radius=5.0, seed=3)
    assert not ver.violated
    assert ver.value >= -1e-6


def test_sampled_verification_finds_violation():
    f0 = QuadraticFunction([[2.0]], [0.0], 0.0)
    one = QuadraticFunction([[0.0]], [0.0], 1.0)
    system = FunctionSystem(1, f0, (one,))
    ver = cert.verify_certificate_sampled(system, [1.0], radius=5.0, seed=3)
    assert ver.violated
    assert ver.value == pytest.approx(-1.0, abs=1e-3)
    assert ver.x[0] == pytest.approx(0.0, abs=1e-2)


def test_p1_equal_functions_found():
    system = FunctionSystem(2, _norm_sq(2), (_norm_sq(2),))
    res = cert.find_certificate_p1(system)
    assert res.found
    ver = cert.verify_certificate_quadratic(system, res.certificate.alpha)
    assert ver.valid


def test_p1_identical_shifted():
    f = QuadraticFunction([[2.0]], [0.0], -1.0)
    system = FunctionSystem(1, f, (f,))
    res = cert.find_certificate_p1(system)
    assert res.found


def test_p1_plateau_region():
    # f0 = 2 x^2, f1 = x^2: every alpha in [0, 2] is a certificate
    system = FunctionSystem(1, QuadraticFunction([[4.0]], [0.0], 0.0),
                            (QuadraticFunction([[2.0]], [0.0], 0.0),))
    res = cert.find_certificate_p1(system)
    assert res.found
    a = float(res.certificate.alpha[0])
    assert 0.0 <= a <= 2.0 + 1e-9
    assert res.certificate.lambda_min == pytest.approx(0.0, abs=1e-12)


def test_p1_not_found_when_implication_fails(example3):
    res = cert.find_certificate_p1(example3)
    assert not res.found
    assert res.best_lambda_min < 0


def test_supergradient_two_constraints():
    nsq = _norm_sq(2)
    system = FunctionSystem(2, QuadraticFunction(4 * np.eye(2), np.zeros(2),
                                                 0.0), (nsq, nsq))
    res = cert.find_certificate_general(system, iters=2000, seed=3)
    assert res.found
    alpha = res.certificate.alpha
    assert np.all(alpha >= 0)
    assert np.sum(alpha) <= 2.0 + 1e-6


def test_supergradient_no_certificate_for_negative_objective():
    system = FunctionSystem(1, QuadraticFunction([[0.0]], [0.0], -1.0),
                            (QuadraticFunction([[0.0]], [0.0], 0.0),))
    res = cert.find_certificate_general(system, iters=300, seed=3)
    assert not res.found
    assert res.best_lambda_min == pytest.approx(-2.0)


def test_p1_and_general_agree_on_random_systems():
    # adjudicate any disagreement with a fine alpha grid
    master = SplitMix64(777)
    agree = 0
    disagreements = []
    for i in range(100):
        system = random_p1_system(master.next_u64())
        r1 = cert.find_certificate_p1(system)
        r2 = cert.find_certificate_general(system, iters=2000, seed=i)
        if r1.found == r2.found:
            agree += 1
        else:
            best = max(
                float(np.min(np.linalg.eigvalsh(
                    cert.combined_matrix(system, [a]))))
                for a in np.linspace(0.0, 1e4, 10000)
            )
            disagreements.append((i, r1.found, r2.found, best))
    assert agree >= 98, disagreements


def test_lambda_min_is_concave_in_alpha():
    rng = SplitMix64(55)
    for _ in range(25):
        n = 1 + int(rng.randint(3))
        p = 1 + int(rng.randint(3))
        system = FunctionSystem(n, random_quadratic(rng, n),
                                tuple(random_quadratic(rng, n)
                                      for _ in range(p)))
        a1 = np.abs(rng.uniforms(p, 0.0, 3.0))
        a2 = np.abs(rng.uniforms(p, 0.0, 3.0))
        g = lambda a: float(np.min(np.linalg.eigvalsh(
            cert.combined_matrix(system, a))))
        mid = g(0.5 * a1 + 0.5 * a2)
        scale = 1.0 + max(abs(g(a1)), abs(g(a2)))
        assert mid >= 0.5 * g(a1) + 0.5 * g(a2) - 1e-8 * scale


def test_scaling_objective_scales_certificate():
    rng = SplitMix64(66)
    scaled = 0
    for i in range(40):
        system = random_p1_system(rng.next_u64(), max_n=3)
        res = cert.find_certificate_p1(system)
        if not res.found:
            continue
        scaled += 1
        f0 = system.f0
        doubled = FunctionSystem(
            system.n,
            QuadraticFunction(2 * f0.Q, 2 * f0.c, 2 * f0.d),
            system.constraints)
        ver = cert.verify_certificate_quadratic(
            doubled, 2.0 * res.certificate.alpha)
        assert ver.valid, i
    assert scaled >= 5


def test_certificate_soundness_against_sampling():
    # the trivial direction: a verified certificate leaves no counterexample
    rng = SplitMix64(88)
    found = 0
    for i in range(25):
        system = random_p1_system(rng.next_u64(), max_n=3)
        res = cert.find_certificate_p1(system)
        if not res.found:
            continue
        found += 1
        check = find_counterexample(system, samples=20000, seed=i)
        assert not check.found, i
    assert found >= 4


def _convex_case(rng, n):
    vals = rng.uniforms(n * n, -1.0, 1.0)
    L = np.array(vals).reshape(n, n)
    Q1 = -(L @ L.T) - 0.2 * np.eye(n)
    c1 = np.array(rng.uniforms(n, -1.0, 1.0))
    xbar = np.linalg.solve(-Q1, c1)
    d1 = float(rng.uniforms(1, 0.5, 2.0)[0]) - (0.5 * xbar @ Q1 @ xbar
                                                + c1 @ xbar)
    f1 = QuadraticFunction(Q1, c1, d1)
    a = float(rng.uniforms(1, 0.3, 2.0)[0])
    vals = rng.uniforms(n * n + n + 1, -1.0, 1.0)
    Lr = np.array(vals[: n * n]).reshape(n, n)
    Qr = (Lr @ Lr.T + 0.3 * np.eye(n)) - a * Q1
    cr = np.array(vals[n * n: n * n + n])
    dr = 0.5 * float(cr @ np.linalg.solve(Qr, cr)) + 0.1 + abs(vals[-1])
    f0 = QuadraticFunction(a * Q1 + Qr, a * c1 + cr, a * d1 + dr)
    return FunctionSystem(n, f0, (f1,))


def test_separation_route_on_convex_instance():
    rng = SplitMix64(4242)
    system = _convex_case(rng, 2)
    cloud = geo.sample_image(system, 10.0, 512, 5)
    res = cert.find_certificate_via_separation(system, cloud, seed=6)
    assert res.found
    assert res.certificate.verified == cert.EXACT_PSD
    assert np.all(res.certificate.alpha >= 0)


def test_separation_route_no_separator(example3):
    cloud = geo.sample_image(example3, 10.0, 256, 5)
    res = cert.find_certificate_via_separation(example3, cloud, seed=6)
    assert not res.found
    assert res.outcome == cert.NO_SEPARATOR
    assert res.witness is not None and res.witness.intersects


def test_certificate_text_round_trip():
    c = cert.Certificate(alpha=np.array([0.5, 1.25]), lambda_min=0.003,
                         verified=cert.EXACT_PSD)
    text = cert.format_certificate(c)
    assert "alpha = [0.5, 1.25]" in text
    assert "lambda_min = 0.003" in text
    assert "verified = ExactPSD" in text
    back = cert.parse_certificate(text)
    assert back.alpha.tolist() == [0.5, 1.25]
    assert back.lambda_min == 0.003
    assert back.verified == cert.EXACT_PSD
    empty = cert.parse_certificate(cert.format_certificate(
        cert.Certificate(alpha=np.zeros(0), lambda_min=None,
                         verified=cert.SAMPLED_ONLY)))
    assert empty.alpha.shape == (0,)
    assert empty.lambda_min is None


def test_sampled_and_exact_verdicts_agree():
    # cross-module check on random quadratic systems and multipliers
    rng = SplitMix64(97)
    agreements = 0
    for i in range(20):
        n = 1 + int(rng.randint(3))
        system = FunctionSystem(n, random_quadratic(rng, n),
                                (random_quadratic(rng, n),))
        alpha = [float(rng.uniforms(1, 0.0, 2.0)[0])]
        exact = cert.verify_certificate_quadratic(system, alpha)
        sampled = cert.verify_certificate_sampled(system, alpha, seed=i)
        if exact.valid:
            assert not sampled.violated, i
            agreements += 1
        elif exact.lambda_min < -1e-3:
            # a clear exact violation must be visible to sampling
            assert sampled.violated, i
            agreements += 1
    assert agreements >= 15


def test_separation_route_never_false_found_without_slater():
    # f1 = 0 everywhere, f0 = x1: no Slater point and no certificate
    system = FunctionSystem(1, QuadraticFunction([[0.0]], [1.0], 0.0),
                            (QuadraticFunction([[0.0]], [0.0], 0.0),))
    cloud = geo.sample_image(system, 10.0, 256, 5)
    res = cert.find_certificate_via_separation(system, cloud, seed=6)
    assert not res.found
    assert res.outcome in (cert.SLATER_BLOCKED, cert.NO_SEPARATOR)
