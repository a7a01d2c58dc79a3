//! Built-in experiment grids.

use byzfdr_core::attack::{AttackConfig, AttackModel};
use byzfdr_core::bounds::BoundKind;
use byzfdr_core::defense::Defense;
use byzfdr_core::model::AltMeanDistribution;
use byzfdr_core::sim::{ExperimentConfig, NullSpec, SweepAxis};

/// One curve of a plan: an attack/defense pair and the bounds attached to it.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub attack: AttackModel,
    pub defense: Defense,
    pub bounds: Vec<BoundKind>,
}

impl Series {
    fn new(attack: AttackModel, defense: Defense, bounds: &[BoundKind]) -> Self {
        Self { attack, defense, bounds: bounds.to_vec() }
    }
}

/// A fully resolved run: base configuration, optional sweep, and series.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub name: String,
    pub description: String,
    pub base: ExperimentConfig,
    pub axis: Option<SweepAxis>,
    pub values: Vec<f64>,
    pub series: Vec<Series>,
}

pub const PRESET_NAMES: [&str; 5] = ["exp1a", "exp1b", "exp2", "exp3", "exp4"];

fn grid(from: usize, to: usize, step: usize) -> Vec<f64> {
    (from..=to).step_by(step).map(|v| v as f64).collect()
}

fn full_scale_base(d: usize, lambda: f64) -> ExperimentConfig {
    ExperimentConfig {
        n: 10_000,
        d,
        nulls: NullSpec::Proportional { n0: 8000 },
        q: 0.05,
        attack: AttackConfig::new(AttackModel::None, lambda),
        defense: Defense::None,
        alt: AltMeanDistribution::default(),
        trials: 10_000,
        master_seed: 0,
        grid_index: 0,
        bounds: Vec::new(),
    }
}

pub fn preset(name: &str) -> Result<Plan, String> {
    use AttackModel::*;
    use BoundKind::*;
    let oracle_vs_classifier = vec![
        Series::new(Oracle, Defense::None, &[OracleAttack]),
        Series::new(BhClassifier, Defense::None, &[ClassifierUpper, OracleAttack]),
    ];
    let plan = match name {
        "exp1a" => Plan {
            name: name.into(),
            description: "oracle vs BH-classifier, single captured node with m/n = 0.2, sweep n0".into(),
            base: full_scale_base(5, 0.2),
            axis: Some(SweepAxis::N0),
            values: grid(1000, 9000, 1000),
            series: oracle_vs_classifier,
        },
        "exp1b" => Plan {
            name: name.into(),
            description: "oracle vs BH-classifier, n0 = 8000, sweep the captured node size m".into(),
            base: full_scale_base(5, 0.2),
            axis: Some(SweepAxis::M),
            values: vec![500.0, 1000.0, 2000.0, 2500.0, 5000.0],
            series: oracle_vs_classifier,
        },
        "exp2" => Plan {
            name: name.into(),
            description:
                "BH-classifier on one node with m = 2000, no defense / resample zeros / remove zeros, sweep n0".into(),
            base: full_scale_base(5, 0.2),
            axis: Some(SweepAxis::N0),
            values: grid(1000, 9000, 1000),
            series: Defense::ALL.iter().map(|&d| Series::new(BhClassifier, d, &[BhBaseline])).collect(),
        },
        "exp3" => Plan {
            name: name.into(),
            description: "enhanced BH-classifier vs shuffling, single captured node with m/n = 0.2, sweep n0".into(),
            base: full_scale_base(5, 0.2),
            axis: Some(SweepAxis::N0),
            values: grid(1000, 9000, 1000),
            series: vec![
                Series::new(EnhancedBhClassifier, Defense::None, &[]),
                Series::new(Shuffling, Defense::None, &[ShufflingUpper]),
            ],
        },
        "exp4" => {
            let mut base = full_scale_base(20, 0.0);
            base.nulls = NullSpec::Random { n0: 8000 };
            base.alt = AltMeanDistribution::new(2.5, 3.0).expect("valid range");
            Plan {
                name: name.into(),
                description: "d = 20 nodes, mu ~ U(2.5, 3.0), three attacks, sweep captured fraction lambda".into(),
                base,
                axis: Some(SweepAxis::Lambda),
                values: (0..=10).map(|k| k as f64 / 20.0).collect(),
                series: vec![
                    Series::new(BhClassifier, Defense::None, &[DistributedUpper]),
                    Series::new(EnhancedBhClassifier, Defense::None, &[]),
                    Series::new(Shuffling, Defense::None, &[ShufflingUpper]),
                ],
            }
        }
        other => {
            return Err(format!("unknown preset `{other}`; valid presets: {}", PRESET_NAMES.join(", ")));
        }
    };
    Ok(plan)
}

/// Human-readable listing for the `presets` command.
pub fn listing() -> String {
    let mut out = String::new();
    for name in PRESET_NAMES {
        let p = preset(name).expect("built-in preset");
        let b = &p.base;
        let series: Vec<String> = p.series.iter().map(|s| format!("{}/{}", s.attack, s.defense)).collect();
        let values: Vec<String> = p.values.iter().map(|&v| crate::fmt::float(v)).collect();
        out += &format!("{name}: {}\n", p.description);
        out += &format!(
            "  n={} d={} n0={} q={} lambda={} alt=({}, {}) trials={}\n",
            b.n,
            b.d,
            b.nulls.n0(),
            b.q,
            b.attack.lambda_frac,
            b.alt.lo(),
            b.alt.hi(),
            b.trials
        );
        out += &format!(
            "  axis={} values=[{}]\n  series={}\n",
            p.axis.map_or("none", |a| a.name()),
            values.join(", "),
            series.join(", ")
        );
    }
    out
}
