//! One function per subcommand. Each returns a [`Report`]; rendering and
//! writing happen in `main`.

use perceptron_core::analysis::{
    activation_sweep, bitstring, fit_activation, fitted_curve, negativity_sweep, weight_sweep,
};
use perceptron_core::circuits::{
    block_angle, block_target, circuit_unitary, decompose_perceptron, equivalence_fidelity, estimate, Circuit,
};
use perceptron_core::config::{RunConfig, SweepQuantity};
use perceptron_core::device::{coupler_sweep, SweepValue};
use perceptron_core::dynamics::perceptron_blocks;
use perceptron_core::numerics::StepRule;
use perceptron_core::units::{mhz, to_mhz, to_us, us};
use perceptron_core::{Error, Result};

use crate::svg::{Plot, Series};

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

pub enum Body {
    Csv(Table),
    /// Free-form text (the circuit file).
    Text(String),
}

pub struct Report {
    /// Extra `#` lines placed after the configuration stamp.
    pub notes: Vec<String>,
    pub body: Body,
    pub plot: Option<Plot>,
    /// Human-readable summary for the terminal.
    pub summary: Vec<String>,
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn series(name: impl Into<String>, points: Vec<(f64, f64)>) -> Series {
    Series {
        name: name.into(),
        points,
    }
}

fn non_empty<T>(v: &[T], what: &str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::Config(format!("{what} must not be empty")));
    }
    Ok(())
}

pub fn zz_sweep(cfg: &RunConfig) -> Result<Report> {
    let device = cfg.device_params()?;
    let sweep = cfg.sweep_for(SweepQuantity::Coupler)?;
    let ghz_values = sweep.values();
    let grid = cfg.grid_for(SweepQuantity::Coupler)?;
    let rows = coupler_sweep(&device, &grid)?;

    let mut table = Table::new(&["omega_c_GHz", "J_numeric_MHz", "J_perturbative_MHz", "dispersive", "reason"]);
    let (mut numeric, mut perturbative) = (Vec::new(), Vec::new());
    for (f, row) in ghz_values.iter().zip(&rows) {
        let mut reasons = Vec::new();
        let mut cell = |v: &SweepValue, label: &str, pts: &mut Vec<(f64, f64)>| match v {
            SweepValue::Value(j) => {
                pts.push((*f, to_mhz(*j)));
                num(to_mhz(*j))
            }
            SweepValue::Invalid(why) => {
                reasons.push(format!("{label}: {why}"));
                String::new()
            }
        };
        let jn = cell(&row.j_numeric, "numeric", &mut numeric);
        let jp = cell(&row.j_perturbative, "perturbative", &mut perturbative);
        table
            .rows
            .push(vec![num(*f), jn, jp, row.dispersive.to_string(), reasons.join("; ")]);
    }
    Ok(Report {
        notes: Vec::new(),
        body: Body::Csv(table),
        plot: Some(Plot {
            title: "ZZ coupling vs coupler frequency".into(),
            x_label: "coupler frequency (GHz)".into(),
            y_label: "J/2π (MHz)".into(),
            series: vec![series("numeric", numeric), series("perturbative", perturbative)],
        }),
        summary: vec![format!("{} coupler points", rows.len())],
    })
}

pub fn activation(cfg: &RunConfig, rule: &StepRule) -> Result<Report> {
    non_empty(&cfg.activation.durations_us, "activation.durations_us")?;
    let biases = cfg.sweep_for(SweepQuantity::Bias)?.values();
    let grid = cfg.grid_for(SweepQuantity::Bias)?;
    let inputs: Vec<usize> = if cfg.activation.inputs.is_empty() {
        vec![0]
    } else {
        cfg.activation
            .inputs
            .iter()
            .map(|s| cfg.input_index(s))
            .collect::<Result<_>>()?
    };

    let mut table = Table::new(&["bias_MHz", "population", "input_string", "T_us"]);
    let mut plot_series = Vec::new();
    for &t in &cfg.activation.durations_us {
        let pc = cfg.perceptron_config(Some(t))?;
        for &x in &inputs {
            let curve = activation_sweep(&pc, &grid, x, rule)?;
            let label = curve.input_string();
            for (b, p) in biases.iter().zip(&curve.populations) {
                table.rows.push(vec![num(*b), num(*p), label.clone(), num(t)]);
            }
            plot_series.push(series(
                format!("T={t} µs, x={}", if label.is_empty() { "-" } else { &label }),
                biases.iter().copied().zip(curve.populations.iter().copied()).collect(),
            ));
        }
    }
    Ok(Report {
        notes: Vec::new(),
        body: Body::Csv(table),
        plot: Some(Plot {
            title: "Activation function".into(),
            x_label: "bias b/2π (MHz)".into(),
            y_label: "excited population".into(),
            series: plot_series,
        }),
        summary: vec![format!(
            "{} curves × {} points",
            cfg.activation.durations_us.len() * inputs.len(),
            grid.len()
        )],
    })
}

pub fn weight_sweep_cmd(cfg: &RunConfig, rule: &StepRule) -> Result<Report> {
    non_empty(&cfg.weight_sweep.biases_mhz, "weight_sweep.biases_mhz")?;
    let weights_mhz = cfg.sweep_for(SweepQuantity::Weight)?.values();
    let grid = cfg.grid_for(SweepQuantity::Weight)?;
    // weights come from the sweep; the configured ones are not used
    let base = RunConfig {
        perceptron: perceptron_core::config::PerceptronSection {
            weights_mhz: vec![0.0],
            ..cfg.perceptron.clone()
        },
        ..cfg.clone()
    }
    .perceptron_config(None)?;

    let mut table = Table::new(&["weight_MHz", "population_input0", "population_input1", "bias_MHz"]);
    let mut plot_series = Vec::new();
    for &b in &cfg.weight_sweep.biases_mhz {
        let rows = weight_sweep(&base, &grid, mhz(b), rule)?;
        let (mut p0, mut p1) = (Vec::new(), Vec::new());
        for (w, r) in weights_mhz.iter().zip(&rows) {
            table.rows.push(vec![
                num(*w),
                num(r.population_input0),
                num(r.population_input1),
                num(b),
            ]);
            p0.push((*w, r.population_input0));
            p1.push((*w, r.population_input1));
        }
        plot_series.push(series(format!("x=0, b={b} MHz"), p0));
        plot_series.push(series(format!("x=1, b={b} MHz"), p1));
    }
    Ok(Report {
        notes: Vec::new(),
        body: Body::Csv(table),
        plot: Some(Plot {
            title: "Output population vs weight".into(),
            x_label: "weight w/2π (MHz)".into(),
            y_label: "excited population".into(),
            series: plot_series,
        }),
        summary: vec![format!("{} biases × {} weights", cfg.weight_sweep.biases_mhz.len(), grid.len())],
    })
}

pub fn negativity(cfg: &RunConfig, rule: &StepRule) -> Result<Report> {
    if cfg.perceptron.weights_mhz.len() != 1 {
        return Err(Error::Config(format!(
            "negativity needs exactly one perceptron weight (perceptron.weights_mhz), got {}",
            cfg.perceptron.weights_mhz.len()
        )));
    }
    let t1 = match cfg.negativity.t1_us {
        Some(t) if t.is_nan() || t <= 0.0 => {
            return Err(Error::Config(format!("negativity.t1_us = {t} must be positive")));
        }
        other => other.map(us),
    };
    let pc = cfg.perceptron_config(None)?;
    let biases = cfg.sweep_for(SweepQuantity::Bias)?.values();
    let grid = cfg.grid_for(SweepQuantity::Bias)?;
    let rows = negativity_sweep(&pc, &grid, t1, rule)?;

    let mut header = vec!["bias_MHz", "negativity_unitary"];
    if t1.is_some() {
        header.push("negativity_T1");
    }
    let mut table = Table::new(&header);
    let (mut su, mut sd) = (Vec::new(), Vec::new());
    for (b, r) in biases.iter().zip(&rows) {
        let mut row = vec![num(*b), num(r.unitary)];
        su.push((*b, r.unitary));
        if let Some(d) = r.damped {
            row.push(num(d));
            sd.push((*b, d));
        }
        table.rows.push(row);
    }
    let peak = rows.iter().map(|r| r.unitary).fold(0.0, f64::max);
    let mut plot_series = vec![series("unitary", su)];
    if let Some(t) = cfg.negativity.t1_us {
        plot_series.push(series(format!("T1 = {t} µs"), sd));
    }
    Ok(Report {
        notes: Vec::new(),
        body: Body::Csv(table),
        plot: Some(Plot {
            title: "Negativity after the gate".into(),
            x_label: "bias b/2π (MHz)".into(),
            y_label: "negativity".into(),
            series: plot_series,
        }),
        summary: vec![format!("peak unitary negativity {peak:.4}")],
    })
}

pub fn decompose(cfg: &RunConfig, rule: &StepRule) -> Result<Report> {
    let d = &cfg.decompose;
    let mut notes = Vec::new();
    for n in 1..=d.max_table_n {
        let e = estimate(n, d.cnot_fidelity, d.cnot_time_ns * 1e-9)?;
        notes.push(format!(
            "N={} Ng={} t_us={:.3} F={:.4}",
            n,
            e.n_cnots,
            to_us(e.total_time),
            e.fidelity_estimate
        ));
    }
    if d.n_inputs >= 3 {
        notes.push(format!(
            "synthesis not implemented for N ≥ 3 (N = {}); counts only",
            d.n_inputs
        ));
        return Ok(Report {
            summary: notes.clone(),
            notes,
            body: Body::Text(String::new()),
            plot: None,
        });
    }
    let thetas = if d.thetas.is_empty() {
        // angles read off the simulated gate
        let pc = cfg.perceptron_config(None)?;
        if pc.n_inputs() != d.n_inputs as usize {
            return Err(Error::Config(format!(
                "decompose.thetas is empty and perceptron.weights_mhz has {} entries, not n_inputs = {}",
                pc.n_inputs(),
                d.n_inputs
            )));
        }
        perceptron_blocks(&pc, rule)?.iter().map(block_angle).collect()
    } else {
        d.theta_vector()?
    };
    let circuit = decompose_perceptron(&thetas)?;
    let text = circuit.to_text();
    // verify what was emitted, not the in-memory circuit
    let parsed = Circuit::parse(&text)?;
    let fidelity = equivalence_fidelity(&circuit_unitary(&parsed)?, &block_target(&thetas)?)?;
    for (x, t) in thetas.iter().enumerate() {
        notes.push(format!("theta[{}]={t}", bitstring(x, d.n_inputs as usize)));
    }
    notes.push(format!("cnots={} fidelity={fidelity}", parsed.cnot_count()));
    Ok(Report {
        summary: notes.clone(),
        notes,
        body: Body::Text(text),
        plot: None,
    })
}

pub fn fit(cfg: &RunConfig, rule: &StepRule) -> Result<Report> {
    non_empty(&cfg.fit.durations_us, "fit.durations_us")?;
    let x = cfg.input_index(&cfg.fit.input)?;
    let biases = cfg.sweep_for(SweepQuantity::Bias)?.values();
    let grid = cfg.grid_for(SweepQuantity::Bias)?;
    let mut table = Table::new(&["bias_MHz", "population", "fitted", "input_string", "T_us"]);
    let mut notes = Vec::new();
    let mut plot_series = Vec::new();
    for &t in &cfg.fit.durations_us {
        let pc = cfg.perceptron_config(Some(t))?;
        let curve = activation_sweep(&pc, &grid, x, rule)?;
        let f = fit_activation(&curve)?;
        let model = fitted_curve(&curve, &f)?;
        let label = curve.input_string();
        for ((b, p), m) in biases.iter().zip(&curve.populations).zip(&model) {
            table.rows.push(vec![num(*b), num(*p), num(*m), label.clone(), num(t)]);
        }
        notes.push(format!(
            "T_us={t} T_fit_us={} delta_MHz={} residual_rms={}",
            to_us(f.t_fit),
            to_mhz(f.delta_offset),
            f.residual_rms
        ));
        plot_series.push(series(
            format!("simulated T={t} µs"),
            biases.iter().copied().zip(curve.populations.iter().copied()).collect(),
        ));
        plot_series.push(series(
            format!("fit T={t} µs"),
            biases.iter().copied().zip(model.iter().copied()).collect(),
        ));
    }
    Ok(Report {
        summary: notes.clone(),
        notes,
        body: Body::Csv(table),
        plot: Some(Plot {
            title: "Analytic fit of the activation function".into(),
            x_label: "bias b/2π (MHz)".into(),
            y_label: "excited population".into(),
            series: plot_series,
        }),
    })
}
