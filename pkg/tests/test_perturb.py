import random
from fractions import Fraction

import pytest
from conftest import (
    SE_DE_2,
    four_eq_system,
    generic_three_system,
    pattern_system,
    tall_order_system,
    v,
)

from diffres.algebra import Frac, Poly, const_sym, exact_div, sym
from diffres.errors import (
    AssumptionViolated,
    BetaOmegaViolated,
    EmptyInput,
    NotDPPEShaped,
    NotLinear,
    NotSuperEssential,
    SymbolClash,
    ZeroInput,
)
from diffres.formulas import Verdict, certify_nonzero, dfres, spec_cres
from diffres.perturb import (
    FractionOperator,
    Perturbation,
    compose,
    decompose_linear,
    default_perturbation,
    divide_left,
    eliminate,
    extract_resultant,
    gcld,
    id_primitive_part,
    lowest_p_coefficient,
    perturb_system,
    perturbed_determinant,
    perturbed_matrix,
    phi_perturbation,
    verify_membership,
)
from diffres.structure import is_super_essential
from diffres.systems import (
    DiffOperator,
    LinearDiffPoly,
    LinearSystem,
    linear_poly,
)


def term(ops):
    return LinearDiffPoly(Poly.zero(), ops)


def skewed_chain_system():
    """Super essential, but the rows are ordered against their orders."""
    f1 = linear_poly(v("c1"), {1: {3: 1}})
    f2 = linear_poly(v("c2"), {2: {0: 1}})
    f3 = linear_poly(v("c3"), {1: {4: 1}, 2: {0: 1}})
    return LinearSystem([f1, f2, f3], params=2)


C4 = ("c1", "c2", "c3", "c4")


def normalized_target():
    return (-v("c1", 1) - v("c1") - 2 * v("c2", 2) - 2 * v("c2")
            + v("c3", 1) + 3 * v("c3") + 2 * v("c4"))


def operators_up_to_sign(decomposition, expected):
    got = {name: decomposition.operators[name] for name in expected}
    plain = {name: DiffOperator(d) for name, d in expected.items()}
    if got == plain:
        return True
    flipped = {name: DiffOperator({k: -c for k, c in d.items()})
               for name, d in expected.items()}
    return got == flipped


# ---------------------------------------------------------------------------
# building perturbations
# ---------------------------------------------------------------------------


def test_default_perturbation_of_the_four_eq_system():
    eps = default_perturbation(four_eq_system(1))
    assert eps.terms == (
        term({3: {2: 1}}),
        term({1: {0: 1}, 3: {0: 1}}),
        term({2: {1: 1}, 1: {0: 1}}),
        term({2: {0: 1}}),
    )
    assert eps.matching == ((1, 3), (2, 1), (3, 2))


def test_default_perturbation_requires_super_essential():
    with pytest.raises(NotSuperEssential):
        default_perturbation(tall_order_system())


def test_default_perturbation_reorders_an_awkward_chain():
    system = skewed_chain_system()
    eps = default_perturbation(system)
    assert eps.terms == (
        term({1: {3: 1}, 2: {0: 1}}),
        term({2: {0: 1}}),
        term({1: {3: 1}}),
    )
    assert eps.matching == ((1, 1), (2, 2))
    det = perturbed_determinant(system, eps)
    assert not det.is_zero()


def test_phi_perturbation_matches_the_worked_values():
    eps = phi_perturbation((0, 0, 0), (2, 0, 2, 2))
    assert eps.terms == (
        term({3: {2: 1}}),
        term({2: {0: 1}, 3: {0: 1}}),
        term({1: {2: 1}, 2: {0: 1}}),
        term({1: {0: 1}}),
    )


def test_phi_perturbation_rejects_bad_data():
    with pytest.raises(BetaOmegaViolated, match="b3"):
        phi_perturbation((0, 0, 3), (2, 0, 2, 2))
    with pytest.raises(BetaOmegaViolated):
        phi_perturbation((0, 0), (2, 0, 2, 2))
    with pytest.raises(BetaOmegaViolated):
        phi_perturbation((0, -1, 0), (2, 0, 2, 2))


def test_perturbation_terms_must_be_homogeneous():
    with pytest.raises(NotLinear):
        Perturbation((LinearDiffPoly(v("c1"), {1: {0: 1}}),))
    with pytest.raises(NotLinear):
        Perturbation((term({1: {0: v("a")}}),))


# ---------------------------------------------------------------------------
# applying perturbations
# ---------------------------------------------------------------------------


def test_perturb_system_shifts_the_operators():
    system = four_eq_system(1)
    shifted = perturb_system(system, default_perturbation(system))
    p = Poly.var(const_sym("p"))
    assert shifted.polys[0].ops[3] == DiffOperator({0: 1, 2: -p})
    assert shifted.polys[1].ops[1] == DiffOperator({0: 1 - p})
    assert shifted.polys[1].ops[3] == DiffOperator({0: 1 - p})
    assert shifted.polys[2].ops[2] == DiffOperator({0: 1, 1: -p})
    assert shifted.polys[3].ops[2] == DiffOperator({0: -p, 1: 1})
    assert shifted.polys[0].free == v("c1")


def test_perturbing_by_zero_changes_nothing():
    system = four_eq_system(1)
    assert perturb_system(system, Perturbation.zero(4)) == system


def test_perturbation_vanishes_with_the_variable():
    system = four_eq_system(1)
    shifted = perturb_system(system, default_perturbation(system))
    for before, after in zip(system.polys, shifted.polys):
        assert after.to_poly().substitute({"p": 0}) == before.to_poly()


def test_perturb_system_refuses_a_used_symbol():
    f1 = linear_poly(v("c1"), {1: {0: Poly.var(sym("p"))}})
    f2 = linear_poly(v("c2"), {1: {1: 1}})
    system = LinearSystem([f1, f2], params=1)
    with pytest.raises(SymbolClash):
        perturb_system(system, Perturbation.zero(2))


def test_perturb_system_checks_the_length():
    with pytest.raises(ValueError):
        perturb_system(four_eq_system(1), Perturbation.zero(3))


def test_zero_perturbation_reproduces_the_determinant():
    system = four_eq_system(5)
    det = perturbed_determinant(system, Perturbation.zero(4))
    assert det == dfres(system)


def test_perturbed_matrix_requires_super_essential():
    with pytest.raises(NotSuperEssential):
        perturbed_matrix(tall_order_system(), Perturbation.zero(3))


# ---------------------------------------------------------------------------
# the singular four-polynomial example, end to end
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def singular_run():
    system = four_eq_system(1)
    matrix = perturbed_matrix(system, default_perturbation(system))
    det = matrix.determinant()
    degree, low = lowest_p_coefficient(det)
    return system, matrix, det, degree, low


def test_perturbed_frame_keeps_its_size(singular_run):
    _, matrix, _, _, _ = singular_run
    assert matrix.side == 18


def test_lowest_coefficient_sits_at_degree_two(singular_run):
    _, _, det, degree, low = singular_run
    assert degree == 2
    assert not low.is_zero()
    p = Poly.var(const_sym("p"))
    rest = det - p * p * low
    if not rest.is_zero():
        assert lowest_p_coefficient(rest)[0] >= 3


def test_the_operator_decomposition_is_the_known_one(singular_run):
    _, _, _, _, low = singular_run
    dec = decompose_linear(low, C4)
    assert operators_up_to_sign(dec, {
        "c1": {3: -24, 2: -24, 1: 24, 0: 24},
        "c2": {4: -48, 0: 48},
        "c3": {3: 24, 2: 72, 1: -24, 0: -72},
        "c4": {2: 48, 0: -48},
    })
    assert dec.expand() == low


def test_the_common_left_factor_is_quadratic(singular_run):
    _, _, _, _, low = singular_run
    dec = decompose_linear(low, C4)
    g = gcld(dec.operators.values())
    assert g == FractionOperator.of({0: -1, 2: 1})


def test_the_primitive_part_is_the_known_eliminant(singular_run):
    system, _, _, _, low = singular_run
    prim = id_primitive_part(low, C4)
    target = normalized_target()
    assert prim in (target, -target)
    assert verify_membership(low, system)
    assert verify_membership(prim, system)


def test_the_shifted_formula_gives_the_same_eliminant():
    system = four_eq_system(1)
    eps = phi_perturbation((0, 0, 0), (2, 0, 2, 2))
    matrix = perturbed_matrix(system, eps, spec=spec_cres(system))
    assert matrix.side == 22
    _, low = lowest_p_coefficient(matrix.determinant())
    prim = id_primitive_part(low, C4)
    target = normalized_target()
    assert prim in (target, -target)


# ---------------------------------------------------------------------------
# lowest coefficient in the perturbation variable
# ---------------------------------------------------------------------------


def test_lowest_coefficient_without_the_variable():
    f = v("c1") + 2 * v("x", 1)
    assert lowest_p_coefficient(f) == (0, f)


def test_lowest_coefficient_of_a_pure_power():
    p = Poly.var(const_sym("p"))
    assert lowest_p_coefficient(p ** 3 * v("c1")) == (3, v("c1"))
    mixed = p ** 2 * v("x") + p ** 5 * v("y")
    assert lowest_p_coefficient(mixed) == (2, v("x"))


def test_lowest_coefficient_rejects_zero():
    with pytest.raises(ZeroInput):
        lowest_p_coefficient(Poly.zero())


# ---------------------------------------------------------------------------
# decomposition and left-sided arithmetic
# ---------------------------------------------------------------------------


def test_decompose_linear_of_the_regular_determinant():
    det = dfres(four_eq_system(5))
    dec = decompose_linear(det, C4)
    assert operators_up_to_sign(dec, {
        "c1": {0: -64, 1: -64, 2: 64, 3: 64},
        "c2": {0: -128, 3: 256, 4: -128},
        "c3": {0: 192, 1: 64, 2: -192, 3: -320},
        "c4": {0: 128, 2: 128},
    })
    assert dec.expand() == det
    g = gcld(dec.operators.values())
    assert g == FractionOperator.of({0: 1})
    prim = id_primitive_part(det, C4)
    scaled = det * Fraction(1, 64)
    assert prim in (scaled, -scaled)


def test_decompose_linear_rejects_nonlinear_input():
    with pytest.raises(NotLinear):
        decompose_linear(v("c1") * v("c2"), C4)
    with pytest.raises(NotLinear):
        decompose_linear(v("c1") * v("c1"), C4)
    with pytest.raises(NotLinear):
        decompose_linear(v("c1") + v("x"), C4)


def test_left_division_picks_up_the_derivative():
    a = Poly.var(sym("a"))
    da = Poly.var(sym("a", 1))
    q, r = divide_left(DiffOperator({0: da, 1: a}), DiffOperator({1: a}))
    assert q == FractionOperator.of({0: 1})
    assert r == FractionOperator.of({0: da})


def test_gcld_of_one_operator_is_its_monic_form():
    g = gcld([DiffOperator({0: 4, 2: 2})])
    assert g == FractionOperator.of({0: 2, 2: 1})
    with pytest.raises(EmptyInput):
        gcld([])
    with pytest.raises(ZeroInput):
        gcld([DiffOperator({})])


def test_gcld_divides_random_products():
    rng = random.Random(7)
    for trial in range(58):
        # symbolic coefficients stay below the lead; a symbolic lead makes
        # the remainder sequence fractional and painfully large
        symbolic = trial >= 50
        max_deg = 1 if symbolic else 2

        def rand_op():
            deg = rng.randint(0, max_deg)
            coeffs = {deg: Fraction(rng.randint(1, 4))}
            for k in range(deg):
                c = rng.randint(-3, 3)
                if c:
                    coeffs[k] = Fraction(c)
                if symbolic and rng.random() < 0.5:
                    coeffs[k] = Poly.var(sym("t")) + c
            return DiffOperator(coeffs)

        a, b, c = rand_op(), rand_op(), rand_op()
        left = compose(a, b)
        right = compose(a, c)
        g = gcld([left, right])
        assert g.coeffs[-1] == Frac.of(1)
        assert g.deg() >= a.deg()
        for product in (left, right):
            _, r = divide_left(product, g)
            assert r.is_zero()


def test_compose_applies_the_product_rule():
    a = Poly.var(sym("a"))
    got = compose(DiffOperator({1: 1}), DiffOperator({0: a}))
    assert got == DiffOperator({0: Poly.var(sym("a", 1)), 1: a})


# ---------------------------------------------------------------------------
# content extraction
# ---------------------------------------------------------------------------


def test_extract_resultant_from_the_sparse_generic_system():
    system = generic_three_system()
    det = dfres(system)
    reduced = extract_resultant(det, ("c1", "c2", "c3"))
    quotient = exact_div(det, reduced)
    ((mono, _),) = quotient.terms.items()
    assert mono == ((sym("c212"), 1),)
    assert verify_membership(reduced, system)


def test_extract_resultant_rejects_zero():
    with pytest.raises(ZeroInput):
        extract_resultant(Poly.zero(), ("c1",))


# ---------------------------------------------------------------------------
# membership
# ---------------------------------------------------------------------------


def test_membership_of_the_generators_and_their_determinant():
    system = four_eq_system(5)
    assert verify_membership(system.polys[0].to_poly(), system)
    assert verify_membership(dfres(system), system)
    assert not verify_membership(v("c1"), system)


def test_membership_needs_fresh_constants():
    bad = LinearSystem([
        linear_poly(2 * v("c1"), {1: {0: 1}}),
        linear_poly(v("c2"), {1: {1: 1}}),
    ], params=1)
    with pytest.raises(NotDPPEShaped):
        verify_membership(v("c1"), bad)
    repeated = LinearSystem([
        linear_poly(v("c1"), {1: {0: 1}}),
        linear_poly(v("c1"), {1: {1: 1}}),
    ], params=1)
    with pytest.raises(NotDPPEShaped):
        verify_membership(v("c1"), repeated)
    tangled = LinearSystem([
        linear_poly(v("c1"), {1: {0: v("c2")}}),
        linear_poly(v("c2"), {1: {1: 1}}),
    ], params=1)
    with pytest.raises(NotDPPEShaped):
        verify_membership(v("c1"), tangled)


# ---------------------------------------------------------------------------
# the driver
# ---------------------------------------------------------------------------


def test_eliminate_takes_the_direct_branch():
    system = four_eq_system(5)
    report = eliminate(system)
    assert report.branch == "direct"
    assert report.members == (1, 2, 3, 4)
    assert report.output == dfres(system)
    assert report.side == 18
    assert report.co_order == 0
    assert report.membership is True
    assert report.perturbation is None
    assert report.lowest_degree is None


def test_eliminate_switches_to_the_perturbed_branch():
    report = eliminate(four_eq_system(1))
    assert report.branch == "perturbed"
    assert report.lowest_degree == 2
    assert report.co_order >= 1
    assert report.recomputed_side == 18
    target = normalized_target()
    assert report.output in (target, -target)
    assert report.membership is True
    assert report.perturbation is not None
    assert any("co-order" in note for note in report.notes)


def test_eliminate_reports_a_proper_subsystem():
    report = eliminate(pattern_system(SE_DE_2))
    assert report.branch == "direct"
    assert report.members == (3, 4)
    expected = (Poly.var(sym("x32")) * v("c4")
                - v("c3") * Poly.var(sym("x42")))
    assert report.output == expected
    assert report.membership is True
    assert any("subsystem" in note for note in report.notes)


def test_eliminate_rejects_invalid_systems():
    f = linear_poly(v("c1"), {1: {0: 1}})
    with pytest.raises(AssumptionViolated):
        eliminate(LinearSystem([f, f], params=1))


# ---------------------------------------------------------------------------
# random smoke: the perturbed determinant stays nonzero
# ---------------------------------------------------------------------------


def random_super_essential(rng):
    while True:
        n = rng.choice((3, 3, 4))
        m = n - 1
        rows = [sorted(rng.sample(range(1, m + 1), rng.randint(1, m)))
                for _ in range(n)]
        if not all(any(j in row for row in rows) for j in range(1, m + 1)):
            continue
        polys = []
        for i, row in enumerate(rows):
            ops = {j: {rng.randint(0, 2): rng.randint(1, 5)} for j in row}
            polys.append(linear_poly(v(f"c{i + 1}"), ops))
        system = LinearSystem(polys, params=m)
        if is_super_essential(system):
            return system


def test_random_perturbed_determinants_do_not_vanish():
    rng = random.Random(23)
    for trial in range(10):
        system = random_super_essential(rng)
        eps = default_perturbation(system)
        matrix = perturbed_matrix(system, eps)
        verdict = certify_nonzero(matrix, trials=12, seed=trial)
        assert verdict is Verdict.NONZERO_CERTIFIED
