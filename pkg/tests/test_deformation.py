import itertools
import random
from fractions import Fraction

import pytest

from gcdeform.algebroid import complex_eigenbundle
from gcdeform.courant import GenSection, pair
from gcdeform.deformation import (
    CLASSICAL_COMPLEX,
    COMPLEX_NONCLASSICAL,
    SYMPLECTIC,
    DeformationError,
    DeformationMap,
    classify,
    constrain_map,
    deform_subbundle,
    gauge_image,
    mc_residual,
    reduce_family,
    solve_mc_system,
    stratify_type,
    type_of,
)
from gcdeform.frame import ExteriorForm, FrameAlgebra, kodaira_preset
from gcdeform.scalar import (
    GR_ONE,
    GR_ZERO,
    GaussianRational,
    PolyScalar,
    mat_rank,
    parameter,
    poly,
)
from oracles import small_binding

GR = GaussianRational.of
HALF_I = GR(0, Fraction(1, 2))


def t(name):
    return parameter(name)


def bind_all(emap, **values):
    by_name = {p.name: p for p in emap.parameters}
    out = {}
    for name, v in values.items():
        out[by_name[name]] = v if isinstance(v, GaussianRational) else GR(v)
    for p in emap.parameters:
        out.setdefault(p, GR_ZERO)
    return out


# ---------------------------------------------------------------------------
# constrain_map
# ---------------------------------------------------------------------------


def test_constrain_map_parameter_count(kmap):
    emap, report = kmap
    assert [s.name for s in report.free] == ["t11", "t12", "t14", "t21", "t22", "t32"]
    assert len(report.eliminated) == 10


def test_constrain_map_eliminated_relations(kmap):
    _, report = kmap
    rendered = {s.name: str(v) for s, v in report.eliminated.items()}
    assert rendered == {
        "t13": "0",
        "t24": "0",
        "t31": "0",
        "t42": "0",
        "t23": "-t14",
        "t33": "-t11",
        "t34": "-t21",
        "t41": "-t32",
        "t43": "-t12",
        "t44": "-t22",
    }


def test_constrain_map_form_slots(kmap):
    emap, _ = kmap
    expected = {
        (0, 1): "t32",
        (0, 2): "-t11",
        (0, 3): "-t21",
        (1, 2): "-t12",
        (1, 3): "-t22",
        (2, 3): "t14",
    }
    for idx, value in expected.items():
        assert str(emap.form.coefficient(idx)) == value
    # diagonal of the bilinear form vanishes identically
    for j in range(4):
        assert emap.form.coefficient((j, j)).is_zero()


def test_constrained_bilinear_form_antisymmetric(kmap):
    emap, _ = kmap
    for j, k in itertools.product(range(4), repeat=2):
        assert (emap.form.coefficient((j, k)) + emap.form.coefficient((k, j))).is_zero()


def test_zero_map_satisfies_compatibility(ksub):
    zero = [[PolyScalar.zero()] * 4 for _ in range(4)]
    emap = DeformationMap.from_entries(ksub, zero)
    assert emap.form.is_zero()


def test_incompatible_entries_rejected(ksub):
    entries = [[PolyScalar.zero()] * 4 for _ in range(4)]
    entries[0][0] = poly(GR_ONE)  # its pairing partner is missing
    with pytest.raises(DeformationError):
        DeformationMap.from_entries(ksub, entries)


def test_from_form_round_trip(ksub, kmap):
    emap, _ = kmap
    rebuilt = DeformationMap.from_form(ksub, emap.form)
    assert rebuilt.entries == emap.entries


# ---------------------------------------------------------------------------
# Maurer-Cartan
# ---------------------------------------------------------------------------


def test_mc_residual_kodaira(ksub, kmap):
    emap, _ = kmap
    mc = mc_residual(emap)
    nonzero = dict(mc.nonzero())
    assert set(nonzero) == {(0, 1, 2), (0, 1, 3), (0, 2, 3)}
    t12, t22, t14 = poly(t("t12")), poly(t("t22")), poly(t("t14"))
    assert nonzero[(0, 1, 2)] == (t12 * t12).scale(HALF_I)
    assert nonzero[(0, 1, 3)] == (t12 + t12 * t22).scale(HALF_I)
    assert nonzero[(0, 2, 3)] == (t12 * t14).scale(-HALF_I)
    # every constraint vanishes exactly on t12 = 0
    for c in nonzero.values():
        assert c.substitute({t("t12"): GR_ZERO}).is_zero()


def test_mc_residual_zero_map(ksub):
    zero = DeformationMap.from_entries(ksub, [[PolyScalar.zero()] * 4 for _ in range(4)])
    assert mc_residual(zero).is_trivial()


def test_mc_residual_t14_direction_unobstructed(ksub, kmap):
    emap, _ = kmap
    only_t14 = emap.substitute(
        {p: PolyScalar.zero() for p in emap.parameters if p.name != "t14"}
    )
    assert mc_residual(only_t14).is_trivial()


# ---------------------------------------------------------------------------
# gauge image
# ---------------------------------------------------------------------------


def test_gauge_image_kodaira(ksub):
    basis = gauge_image(ksub)
    assert len(basis) == 1
    assert basis[0] == ExteriorForm.basis(ksub.lform_names, (0, 3))


def test_gauge_image_abelian():
    g = FrameAlgebra.build(("X", "Y", "U", "V"), {})
    _, J = kodaira_preset()
    _, sub = complex_eigenbundle(g, J)
    assert gauge_image(sub) == []


def test_gauge_image_inside_kernel(ksub):
    for b in gauge_image(ksub):
        assert ksub.d_L_invariant(b).is_zero()


# ---------------------------------------------------------------------------
# family reduction
# ---------------------------------------------------------------------------


def test_reduce_family_kodaira(ksub, kfamily):
    assert [p.name for p in kfamily.free] == ["t32", "t11", "t22", "t14"]
    assert {s.name for s in kfamily.solved} == {"t12"}
    assert kfamily.solved[t("t12")].is_zero()
    assert [p.name for p in kfamily.dropped_gauge] == ["t21"]
    names = ksub.lform_names
    expected = [
        ExteriorForm.basis(names, (0, 1)),
        -ExteriorForm.basis(names, (0, 2)),
        -ExteriorForm.basis(names, (1, 3)),
        ExteriorForm.basis(names, (2, 3)),
    ]
    assert kfamily.reduced_basis == expected
    assert kfamily.residual_nonlinear == []


def test_reduced_family_residual_is_zero(kfamily):
    assert mc_residual(kfamily.reduced_map).is_trivial()


def test_reduce_family_trivial_gauge():
    g = FrameAlgebra.build(("X", "Y", "U", "V"), {})
    _, J = kodaira_preset()
    _, sub = complex_eigenbundle(g, J)
    emap, report = constrain_map(sub)
    family = reduce_family(mc_residual(emap))
    assert not family.solved and not family.dropped_gauge
    assert set(p.name for p in family.free) == {s.name for s in report.free}


def test_gauge_directions_are_flat(ksub, kfamily):
    s = parameter("s")
    shifted = kfamily.reduced_map.form + kfamily.gauge_basis[0].scale(poly(s))
    shifted_map = DeformationMap.from_form(ksub, shifted)
    assert mc_residual(shifted_map).is_trivial()


# ---------------------------------------------------------------------------
# deformed subbundles
# ---------------------------------------------------------------------------


def test_deform_subbundle_zero_bindings(ksub, kfamily):
    red = kfamily.reduced_map
    structure = deform_subbundle(red, bind_all(red))
    assert structure.isotropic and structure.involutive and structure.separated
    assert [g.coeffs for g in structure.generators] == [
        g.coeffs for g in ksub.generators
    ]


def test_deformed_generators_match_expected_images(kframe, ksub, kfamily):
    red = kfamily.reduced_map
    v = {"t11": GR(Fraction(1, 8)), "t22": GR(Fraction(-1, 8)),
         "t32": GR(0, Fraction(1, 8)), "t14": GR(Fraction(1, 16))}
    structure = deform_subbundle(red, bind_all(red, **v))
    tbar, wbar, omega, rho = structure.generators
    assert tbar == GenSection.make(
        kframe, {"Tbar": GR_ONE, "T": v["t11"], "rhobar": -v["t32"]}
    )
    assert wbar == GenSection.make(
        kframe, {"Wbar": GR_ONE, "W": v["t22"], "omegabar": v["t32"]}
    )
    assert omega == GenSection.make(
        kframe, {"omega": GR_ONE, "W": -v["t14"], "omegabar": -v["t11"]}
    )
    assert rho == GenSection.make(
        kframe, {"rho": GR_ONE, "T": v["t14"], "rhobar": -v["t22"]}
    )
    assert structure.separated and structure.involutive and structure.isotropic


def test_deform_subbundle_isotropy_random(ksub, kfamily):
    rng = random.Random(20240811)
    red = kfamily.reduced_map
    for _ in range(10):
        bindings = {p: small_binding(rng) for p in red.parameters}
        structure = deform_subbundle(red, bindings)
        for a, b in itertools.combinations_with_replacement(structure.generators, 2):
            assert pair(a, b).is_zero()


def test_separation_fails_on_unit_circle(ksub, kfamily):
    red = kfamily.reduced_map
    structure = deform_subbundle(red, bind_all(red, t11=1))
    assert not structure.separated
    with pytest.raises(DeformationError, match="not a generalized complex structure"):
        type_of(red, bind_all(red, t11=1))


def test_unbound_parameters_rejected(kfamily):
    red = kfamily.reduced_map
    with pytest.raises(DeformationError, match="unbound"):
        deform_subbundle(red, {})


# ---------------------------------------------------------------------------
# types and strata
# ---------------------------------------------------------------------------


def test_type_of_sample_points(kfamily):
    red = kfamily.reduced_map
    assert type_of(red, bind_all(red, t14=1)) == 0
    assert type_of(red, bind_all(red, t32=1)) == 2
    assert type_of(red, bind_all(red)) == 2


def test_type_invariant_under_generator_rescaling(kfamily):
    red = kfamily.reduced_map
    structure = deform_subbundle(red, bind_all(red, t14=1))
    rows = [[c.constant_value() for c in g.tangent] for g in structure.generators]
    scaled = [[GR(2) * c for c in rows[0]]] + rows[1:]
    assert mat_rank(scaled) == mat_rank(rows)


def test_classify_labels(kfamily):
    red = kfamily.reduced_map
    assert classify(red, bind_all(red, t14=1)) == (0, SYMPLECTIC)
    assert classify(red, bind_all(red, t32=1)) == (2, COMPLEX_NONCLASSICAL)
    assert classify(red, bind_all(red)) == (2, CLASSICAL_COMPLEX)
    assert classify(red, bind_all(red, t11=GR(Fraction(1, 8)))) == (2, CLASSICAL_COMPLEX)
    assert classify(
        red, bind_all(red, t32=GR(Fraction(1, 8)), t11=GR(Fraction(1, 8)))
    ) == (2, COMPLEX_NONCLASSICAL)


def test_stratify_kodaira(kfamily):
    red = kfamily.reduced_map
    result = stratify_type(red)
    assert result.generic_rank == 4
    assert result.refused is None
    assert len(result.strata) == 2
    generic, special = result.strata
    assert generic.zero == () and [str(p) for p in generic.nonzero] == ["t14"]
    assert generic.k == 0 and generic.label == SYMPLECTIC
    assert [str(p) for p in special.zero] == ["t14"] and special.nonzero == ()
    assert special.k == 2 and special.label == "complex type"
    assert special.substrata == (
        (CLASSICAL_COMPLEX, "t32 = 0"),
        (COMPLEX_NONCLASSICAL, "t32 != 0"),
    )


def test_stratify_zero_map(ksub):
    zero = DeformationMap.from_entries(ksub, [[PolyScalar.zero()] * 4 for _ in range(4)])
    result = stratify_type(zero)
    assert len(result.strata) == 1
    stratum = result.strata[0]
    assert stratum.k == 2 and stratum.zero == () and stratum.nonzero == ()
    assert stratum.substrata == ((CLASSICAL_COMPLEX, ""),)


def test_stratify_agrees_with_type_at_sample_points(kfamily):
    rng = random.Random(7)
    red = kfamily.reduced_map
    result = stratify_type(red)
    by_name = {p.name: p for p in red.parameters}
    for stratum in result.strata:
        for _ in range(5):
            bindings = {p: small_binding(rng) for p in red.parameters}
            for z in stratum.zero:
                (sym,) = [g for g in z.generators()]
                bindings[sym] = GR_ZERO
            ok = all(
                not nz.substitute(bindings).constant_value().is_zero()
                for nz in stratum.nonzero
            )
            if not ok:
                continue
            assert type_of(red, bindings) == stratum.k


def test_stratify_refuses_too_many_parameters(ksub, kmap):
    emap, _ = kmap
    extra = [parameter(f"q{k}") for k in range(9)]
    padded = DeformationMap(
        sub=emap.sub, entries=emap.entries, form=emap.form, parameters=tuple(extra)
    )
    result = stratify_type(padded)
    assert result.refused == "too many parameters"
    assert result.generic_rank == 4


def test_solve_mc_system_staged_moves():
    a, b = parameter("a"), parameter("b")
    # pure power forces a = 0, after which the coupled constraint is linear
    system = [poly(a) * poly(a), poly(a) * poly(b) + poly(b)]
    solved, free, residual = solve_mc_system(system, [a, b])
    assert {s.name: str(v) for s, v in solved.items()} == {"a": "0", "b": "0"}
    assert not free and not residual


def test_solve_mc_system_reports_residual_verbatim():
    a, b = parameter("a"), parameter("b")
    quad = poly(a) * poly(b) + poly(a)
    solved, free, residual = solve_mc_system([quad], [a, b])
    assert not solved
    assert residual == [quad]
    assert free == [a, b]


def test_involutivity_agrees_with_mc_zero_set(kmap):
    # dual-route check: integrability of the deformed span is decided by
    # Courant brackets and rank membership alone, with no reference to d_L or
    # the Schouten bracket, and must match the residual's vanishing exactly
    rng = random.Random(1729)
    emap, _ = kmap
    for trial in range(12):
        bindings = {p: small_binding(rng) for p in emap.parameters}
        if trial % 3 == 0:
            bindings[t("t12")] = GR_ZERO
        bound = emap.substitute(
            {p: PolyScalar.const(v) for p, v in bindings.items()}
        )
        residual_zero = mc_residual(bound).is_trivial()
        structure = deform_subbundle(emap, bindings)
        assert structure.separated
        assert structure.involutive == residual_zero
        t12_zero = bindings[t("t12")].is_zero()
        assert residual_zero == t12_zero
