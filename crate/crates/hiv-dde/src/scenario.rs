//! Named parameter presets reproducing the published simulation scenarios,
//! with the published values carried as advisory annotations.
//!
//! The base constants are shared by every scenario; named presets override
//! recruitment, CTL proliferation, immune impairment, and the delays. The
//! published report under-specifies some scenario parameters and several of
//! its printed summary values are internally inconsistent (see
//! [`Expected::notes`] on the affected presets); annotation comparisons are
//! therefore advisory and never hard assertions.

use crate::model::{Parameters, State};

/// Published annotation values attached to a scenario for advisory
/// comparison in reports.
#[derive(Debug, Clone, Default)]
pub struct Expected {
    /// Published basic reproduction number.
    pub r0: Option<f64>,
    /// Published immune reproduction number.
    pub r1: Option<f64>,
    /// Published equilibrium coordinates (whichever equilibrium the scenario
    /// highlights).
    pub equilibrium: Option<[f64; 5]>,
    /// Published onset bracket for the immune-response delay.
    pub tau0_bracket: Option<(f64, f64)>,
    /// Caveats about the published values for this scenario.
    pub notes: &'static [&'static str],
}

/// One named scenario: parameters, default initial history and horizon, and
/// published annotations.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: &'static str,
    /// What the scenario demonstrates.
    pub description: &'static str,
    pub params: Parameters,
    /// Default constant initial history.
    pub history: State,
    /// Default simulation horizon.
    pub t_end: f64,
    pub expected: Expected,
}

/// Shared base constants (delays zeroed; scenarios set their own).
pub fn base_parameters() -> Parameters {
    Parameters {
        lambda: 7.5,
        beta1: 0.001,
        beta2: 0.001,
        rho: 0.4,
        m1: 4.0,
        m2: 4.0,
        alpha: 0.05,
        a: 0.2,
        k: 0.02,
        c: 0.05,
        h: 0.01,
        eta: 0.003,
        mu1: 0.01,
        mu2: 0.02,
        mu3: 0.04,
        mu4: 0.02,
        mu5: 0.005,
        tau1: 0.0,
        tau2: 0.0,
        tau3: 0.0,
    }
}

/// The default initial history used by the published figures.
pub const DEFAULT_HISTORY: State = State::new(75.0, 1.0, 1.0, 1.0, 0.5);

const R0_DISCREPANCY_NOTE: &str = "published reproduction numbers disagree with direct \
     evaluation of the published formula by a common factor of about 2.08; both values are \
     reported, comparisons are advisory";

fn scenario(
    name: &'static str,
    description: &'static str,
    params: Parameters,
    t_end: f64,
    expected: Expected,
) -> Scenario {
    Scenario {
        name,
        description,
        params,
        history: DEFAULT_HISTORY,
        t_end,
        expected,
    }
}

/// All built-in scenarios.
pub fn registry() -> Vec<Scenario> {
    let base = base_parameters();

    // Infection-free convergence: r0 < 1.
    let fig3 = Parameters {
        c: 0.05,
        tau1: 1.0,
        tau2: 1.0,
        tau3: 2.0,
        ..base
    };
    // Immunity-inactivated scenario as published (but see notes: the
    // published r1 < 1 is irreconcilable with the published formulas).
    let fig4 = Parameters {
        lambda: 75.0,
        c: 0.005,
        ..fig3
    };
    // Immunity-activated convergence with no immune delay.
    let fig5 = Parameters {
        c: 0.005,
        tau1: 0.25,
        tau2: 0.25,
        tau3: 0.0,
        ..base
    };
    // Delay-induced oscillation, intracellular/replication delays zero.
    let case1 = Parameters {
        lambda: 3.0,
        c: 0.01,
        tau1: 0.0,
        tau2: 0.0,
        tau3: 70.0,
        ..base
    };
    // Delay-induced oscillation with all three delays positive. The source
    // does not restate (lambda, c, eta) for this case; this preset fixes
    // them explicitly (c matches the z-coordinate of the published
    // equilibrium of the related zero-immune-delay scenario) and callers can
    // override any field.
    let case2 = Parameters {
        lambda: 7.5,
        c: 0.01,
        tau1: 0.25,
        tau2: 0.25,
        tau3: 20.0,
        ..base
    };

    let case1_notes: &'static [&'static str] = &[
        R0_DISCREPANCY_NOTE,
        "published equilibrium coordinates are not reproduced by the published formulas; \
         computed values are used for analysis",
        "published onset reading (stable at 100, unstable at 101) is advisory; the computed \
         critical delay near 51.3 is verified internally by simulation",
    ];
    let case2_notes: &'static [&'static str] = &[
        "scenario parameters under-specified in the source; lambda, c, eta fixed explicitly \
         here and overridable",
        "published onset bracket (42, 43) is advisory",
    ];

    let mut v = vec![
        scenario(
            "base",
            "base constants, no delays",
            base,
            2000.0,
            Expected::default(),
        ),
        scenario(
            "fig3",
            "infection-free equilibrium globally stable (r0 < 1)",
            fig3,
            2000.0,
            Expected {
                r0: Some(0.2920),
                equilibrium: Some([750.0, 0.0, 0.0, 0.0, 0.0]),
                notes: &[R0_DISCREPANCY_NOTE],
                ..Expected::default()
            },
        ),
        scenario(
            "fig4",
            "immunity-inactivated equilibrium (published as globally stable)",
            fig4,
            4000.0,
            Expected {
                r0: Some(2.9202),
                r1: Some(0.1623),
                equilibrium: Some([2568.3, 4.5164, 9.6011, 9.6011, 0.0]),
                notes: &[
                    R0_DISCREPANCY_NOTE,
                    "published r1 = 0.1623 < 1 is inconsistent with the published r1 formula \
                     even using the published equilibrium's infected-cell level; direct \
                     evaluation gives r1 >> 1, so the immunity-activated equilibrium exists \
                     and attracts instead",
                ],
                ..Expected::default()
            },
        ),
        scenario(
            "fig5",
            "immunity-activated equilibrium globally stable (r1 > 1, no immune delay)",
            fig5,
            4000.0,
            Expected {
                r1: Some(5.8654),
                equilibrium: Some([708.6670, 0.7603, 0.2916, 0.2916, 0.4864]),
                notes: &[R0_DISCREPANCY_NOTE],
                ..Expected::default()
            },
        ),
        scenario(
            "case1",
            "immune-delay bifurcation study, intracellular/replication delays zero",
            case1,
            6000.0,
            Expected {
                r0: Some(6.3776),
                r1: Some(2.3033),
                equilibrium: Some([266.4163, 1.6792, 0.6303, 0.6303, 0.9047]),
                tau0_bracket: Some((100.0, 101.0)),
                notes: case1_notes,
            },
        ),
        scenario(
            "case2",
            "immune-delay bifurcation study, all three delays positive",
            case2,
            6000.0,
            Expected {
                r0: None,
                r1: Some(178.7590),
                equilibrium: Some([742.7828, 0.1328, 0.0486, 0.0486, 0.7423]),
                tau0_bracket: Some((42.0, 43.0)),
                notes: case2_notes,
            },
        ),
    ];

    // fig6..fig9: case-1 parameters at specific immune delays.
    for (name, tau3, desc) in [
        ("fig6", 70.0, "case-1 parameters, immune delay 70"),
        ("fig7", 100.0, "case-1 parameters, immune delay 100"),
        ("fig8", 101.0, "case-1 parameters, immune delay 101"),
        ("fig9", 120.0, "case-1 parameters, immune delay 120"),
    ] {
        v.push(scenario(
            name,
            desc,
            Parameters { tau3, ..case1 },
            6000.0,
            Expected {
                tau0_bracket: Some((100.0, 101.0)),
                notes: case1_notes,
                ..Expected::default()
            },
        ));
    }
    // fig10..fig13: case-2 parameters at specific immune delays.
    for (name, tau3, desc) in [
        ("fig10", 20.0, "case-2 parameters, immune delay 20"),
        ("fig11", 42.0, "case-2 parameters, immune delay 42"),
        ("fig12", 43.0, "case-2 parameters, immune delay 43"),
        ("fig13", 60.0, "case-2 parameters, immune delay 60"),
    ] {
        v.push(scenario(
            name,
            desc,
            Parameters { tau3, ..case2 },
            6000.0,
            Expected {
                tau0_bracket: Some((42.0, 43.0)),
                notes: case2_notes,
                ..Expected::default()
            },
        ));
    }
    v
}

/// Looks up a scenario by name.
pub fn by_name(name: &str) -> Option<Scenario> {
    registry().into_iter().find(|s| s.name == name)
}
