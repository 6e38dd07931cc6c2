"""Exact published witness: a three-region admissible fan subsolution for a vortex sheet."""

from __future__ import annotations

from fractions import Fraction as F

from .fan_model import FanConfiguration, RiemannDatum, ThermoTable, WaveState

# name -> exact value, transcribed verbatim
WITNESS_VALUES = {
    "alpha1": F(-8177336068870495, 140737488355328),
    "alpha2": F(-4833381446756075, 562949953421312),
    "alpha3": F(3121572020159473, 562949953421312),
    "beta1": F(-2536561643647751, 140737488355328),
    "beta2": F(-1114286601116939, 70368744177664),
    "beta3": F(-6219197795695073, 562949953421312),
    "gamma1": F(841617150350781, 549755813888),
    "gamma2": F(-2850833975067331, 17592186044416),
    "gamma3": F(-8954832877447991, 140737488355328),
    "delta1": F(
        28872176135415855785280523654056524019908546591,
        27627619078169805047324756605549438692229120,
    ),
    "delta2": F(
        -867454945412067709200232997995952542374584537720982074207241594308599438377,
        32748846874784971211058574285222379723549486466626634273206947431338475520,
    ),
    "delta3": F(-2871256077954219, 35184372088832),
    "rho_minus": F(2708112612978501, 281474976710656),
    "rho_plus": F(2708112612978501, 281474976710656),
    "rho1": F(6811063536043807, 562949953421312),
    "rho2": F(2057060350258899, 562949953421312),
    "rho3": F(3062207031116133, 281474976710656),
    "eps_minus": F(-5041529442624971, 2199023255552),
    "eps_plus": F(-5041529442624971, 2199023255552),
    "eps1": F(-5015532875605977, 2199023255552),
    "eps2": F(-5073206593829053, 2199023255552),
    "eps3": F(-2515400677054201, 1099511627776),
    "deps_minus": F(1676289422169645, 562949953421312),
    "deps_plus": F(1676289422169645, 562949953421312),
    "deps1": F(
        60006068216738166351756926651195471316209797920723479281182349,
        9106752347169134708406278810788569756749285046122185710632960,
    ),
    "deps2": F(
        1831278218949756891087541424381121781924211556364089293813566516592411003,
        1359848686641341079894728790850171965963388817622134940140753492461486080,
    ),
    "deps3": F(5400383921383283, 1125899906842624),
    "nu_minus": F(-6486283176597739958874052307549, 196306040423407104692364247040),
    "nu1": F(-1153852086001065889673487658885, 60824224363690518566334889984),
    "nu2": F(-4856156003780791, 562949953421312),
    "nu_plus": F(7162856387903725, 562949953421312),
    "v_minus1": F(-4098844157247653, 70368744177664),
    "v_plus1": F(3603433899522037, 562949953421312),
    "v_minus2": F(-996118042660627, 70368744177664),
    "v_plus2": F(-996118042660627, 70368744177664),
    "C1": F(510415269881361, 137438953472),
    "C2": F(1515879700153707, 2199023255552),
    "C3": F(1855257252703141, 8796093022208),
}

# three-significant-figure decimals as printed alongside the exact table
WITNESS_APPROX = {
    "alpha1": -58.1, "alpha2": -8.59, "alpha3": 5.55,
    "beta1": -18.0, "beta2": -15.8, "beta3": -11.0,
    "gamma1": 1530.0, "gamma2": -162.0, "gamma3": -63.6,
    "delta1": 1050.0, "delta2": -26.5, "delta3": -81.6,
    "rho_minus": 9.62, "rho1": 12.1, "rho2": 3.65, "rho3": 10.9,
    "eps_minus": -2290.0, "eps1": -2280.0, "eps2": -2310.0, "eps3": -2290.0,
    "deps_minus": 2.98, "deps1": 6.59, "deps2": 1.35, "deps3": 4.8,
    "nu_minus": -33.0, "nu1": -19.0, "nu2": -8.63, "nu_plus": 12.7,
    "v_minus1": -58.2, "v_plus1": 6.4, "v_minus2": -14.2,
    "C1": 3710.0, "C2": 689.0, "C3": 211.0,
}


def witness_datum() -> RiemannDatum:
    w = WITNESS_VALUES
    return RiemannDatum(
        w["rho_minus"], w["rho_plus"], (w["v_minus1"], w["v_minus2"]), (w["v_plus1"], w["v_plus2"])
    )


def builtin_witness() -> FanConfiguration:
    w = WITNESS_VALUES
    states = tuple(
        WaveState(w[f"rho{i}"], w[f"alpha{i}"], w[f"beta{i}"], w[f"gamma{i}"], w[f"delta{i}"], w[f"C{i}"])
        for i in (1, 2, 3)
    )
    thermo = ThermoTable(
        w["eps_minus"], w["eps_plus"], w["deps_minus"], w["deps_plus"],
        (w["eps1"], w["eps2"], w["eps3"]),
        (w["deps1"], w["deps2"], w["deps3"]),
    )
    speeds = (w["nu_minus"], w["nu1"], w["nu2"], w["nu_plus"])
    return FanConfiguration(witness_datum(), speeds, states, thermo)


BUILTINS = {"appendix-b": builtin_witness}
