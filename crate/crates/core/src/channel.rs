//! Discrete memoryless channels, sensing problems, distributions and types.
//!
//! All alphabets are 0-based integer indices. Every value in this module is
//! immutable once constructed and validated.

use std::fmt;

use crate::error::{Error, Result};

/// Row-sum tolerance accepted when constructing a channel.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;
/// Sum tolerance for [`Distribution::new`].
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-12;

/// Renormalizes `row` in place unless its sum is already within a few ulps of
/// one. The threshold is wider than the rounding left behind by a division,
/// so normalizing twice is the same as normalizing once.
fn renormalize(row: &mut [f64]) {
    let sum: f64 = row.iter().sum();
    let ulps = 4.0 * row.len() as f64 * f64::EPSILON;
    if (sum - 1.0).abs() > ulps {
        row.iter_mut().for_each(|p| *p /= sum);
    }
}

/// A row-stochastic matrix `P(out | in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    inputs: usize,
    outputs: usize,
    data: Vec<f64>,
}

impl ChannelMatrix {
    /// Validates and stores `rows`. `name` only labels error messages.
    pub fn new(name: &'static str, rows: Vec<Vec<f64>>) -> Result<Self> {
        let inputs = rows.len();
        if inputs == 0 {
            return Err(Error::InvalidParameter(format!("{name}: no rows")));
        }
        let outputs = rows[0].len();
        if outputs == 0 {
            return Err(Error::InvalidParameter(format!("{name}: empty rows")));
        }
        let mut data = Vec::with_capacity(inputs * outputs);
        for (r, mut row) in rows.into_iter().enumerate() {
            if row.len() != outputs {
                return Err(Error::DimensionMismatch {
                    expected: outputs,
                    found: row.len(),
                });
            }
            for (c, &value) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::InvalidEntry {
                        matrix: name,
                        row: r,
                        col: c,
                        value,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::NotStochastic {
                    matrix: name,
                    row: r,
                    sum,
                });
            }
            renormalize(&mut row);
            data.extend_from_slice(&row);
        }
        Ok(Self {
            inputs,
            outputs,
            data,
        })
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        Self::new("bsc", vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Noiseless channel on `size` letters.
    pub fn identity(size: usize) -> Result<Self> {
        let rows = (0..size)
            .map(|x| (0..size).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new("identity", rows)
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.data[x * self.outputs..(x + 1) * self.outputs]
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[x * self.outputs + y]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.outputs)
    }
}

/// A joint communication and sensing problem: the communication channel
/// `X → Z`, the two sensing hypotheses `W, V : X → Y`, a per-letter cost and
/// an average-cost budget.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingProblem {
    comm: ChannelMatrix,
    w: ChannelMatrix,
    v: ChannelMatrix,
    cost: Vec<f64>,
    budget: f64,
}

impl SensingProblem {
    pub fn new(
        comm: ChannelMatrix,
        w: ChannelMatrix,
        v: ChannelMatrix,
        cost: Vec<f64>,
        budget: f64,
    ) -> Result<Self> {
        let inputs = comm.inputs();
        for m in [&w, &v] {
            if m.inputs() != inputs {
                return Err(Error::DimensionMismatch {
                    expected: inputs,
                    found: m.inputs(),
                });
            }
        }
        if w.outputs() != v.outputs() {
            return Err(Error::DimensionMismatch {
                expected: w.outputs(),
                found: v.outputs(),
            });
        }
        if cost.len() != inputs {
            return Err(Error::DimensionMismatch {
                expected: inputs,
                found: cost.len(),
            });
        }
        if let Some(bad) = cost.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cost {bad} is not a non-negative real"
            )));
        }
        if !budget.is_finite() || budget < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "budget {budget} is not a non-negative real"
            )));
        }
        for x in 0..inputs {
            for y in 0..w.outputs() {
                let (wy, vy) = (w.get(x, y), v.get(x, y));
                if !(wy * vy > 0.0) {
                    return Err(Error::Positivity { x, y, w: wy, v: vy });
                }
            }
        }
        let min_cost = cost.iter().copied().fold(f64::INFINITY, f64::min);
        if min_cost > budget {
            return Err(Error::InfeasibleBudget { min_cost, budget });
        }
        Ok(Self {
            comm,
            w,
            v,
            cost,
            budget,
        })
    }

    pub fn comm(&self) -> &ChannelMatrix {
        &self.comm
    }

    /// Sensing channel under hypothesis 0.
    pub fn w(&self) -> &ChannelMatrix {
        &self.w
    }

    /// Sensing channel under hypothesis 1.
    pub fn v(&self) -> &ChannelMatrix {
        &self.v
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn input_size(&self) -> usize {
        self.comm.inputs()
    }

    pub fn sensing_output_size(&self) -> usize {
        self.w.outputs()
    }

    /// The same problem with the two sensing hypotheses exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            comm: self.comm.clone(),
            w: self.v.clone(),
            v: self.w.clone(),
            cost: self.cost.clone(),
            budget: self.budget,
        }
    }

    /// The same problem with a different budget.
    pub fn with_budget(&self, budget: f64) -> Result<Self> {
        Self::new(
            self.comm.clone(),
            self.w.clone(),
            self.v.clone(),
            self.cost.clone(),
            budget,
        )
    }

    pub(crate) fn check_input_len(&self, len: usize) -> Result<()> {
        if len != self.input_size() {
            return Err(Error::DimensionMismatch {
                expected: self.input_size(),
                found: len,
            });
        }
        Ok(())
    }
}

/// A probability vector on the input alphabet. When produced from a
/// sequence it remembers the blocklength, i.e. it is an empirical type.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
    denominator: Option<usize>,
}

impl Distribution {
    /// Entries must be non-negative and sum to one within 1e-12.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::validate(&probs, DISTRIBUTION_TOLERANCE)?;
        Ok(Self {
            probs,
            denominator: None,
        })
    }

    /// Like [`Distribution::new`] but accepts sums within 1e-9 and rescales.
    pub fn normalized(mut probs: Vec<f64>) -> Result<Self> {
        Self::validate(&probs, ROW_SUM_TOLERANCE)?;
        renormalize(&mut probs);
        Ok(Self {
            probs,
            denominator: None,
        })
    }

    fn validate(probs: &[f64], tol: f64) -> Result<()> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("no entries".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!("entry {p} is negative or not finite")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
        }
        Ok(())
    }

    /// Wraps solver output: clamps rounding noise below zero and rescales.
    pub(crate) fn from_solver(mut probs: Vec<f64>) -> Self {
        probs.iter_mut().for_each(|p| *p = p.max(0.0));
        let sum: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= sum);
        Self {
            probs,
            denominator: None,
        }
    }

    /// The type with the given letter counts.
    pub fn from_counts(counts: &[usize]) -> Result<Self> {
        let n: usize = counts.iter().sum();
        if n == 0 {
            return Err(Error::EmptySequence);
        }
        Ok(Self {
            probs: counts.iter().map(|&c| c as f64 / n as f64).collect(),
            denominator: Some(n),
        })
    }

    pub fn uniform(size: usize) -> Self {
        Self {
            probs: vec![1.0 / size as f64; size],
            denominator: None,
        }
    }

    /// Point mass on letter `x`.
    pub fn degenerate(size: usize, x: usize) -> Self {
        let mut probs = vec![0.0; size];
        probs[x] = 1.0;
        Self {
            probs,
            denominator: None,
        }
    }

    /// Bernoulli-style distribution on a binary alphabet with `P(1) = rho`.
    pub fn binary(rho: f64) -> Result<Self> {
        Self::new(vec![1.0 - rho, rho])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// The blocklength when this is an empirical type.
    pub fn denominator(&self) -> Option<usize> {
        self.denominator
    }

    /// Letter counts `n·P(a)` if every entry is a multiple of `1/n`.
    pub fn counts(&self, n: usize) -> Result<Vec<usize>> {
        let mut counts = Vec::with_capacity(self.probs.len());
        for &p in &self.probs {
            let scaled = p * n as f64;
            let k = scaled.round();
            if (scaled - k).abs() > 1e-9 * (1.0 + n as f64) {
                return Err(Error::NotAType { n });
            }
            counts.push(k as usize);
        }
        if counts.iter().sum::<usize>() != n {
            return Err(Error::NotAType { n });
        }
        Ok(counts)
    }

    pub fn l1_distance(&self, other: &Distribution) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum())
    }

    /// Letters with positive probability.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, p)| p > 0.0)
    }
}

/// Empirical type of `sequence` over an alphabet of `alphabet_size` letters.
pub fn empirical_type(sequence: &[usize], alphabet_size: usize) -> Result<Distribution> {
    if sequence.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut counts = vec![0usize; alphabet_size];
    for (position, &symbol) in sequence.iter().enumerate() {
        if symbol >= alphabet_size {
            return Err(Error::SymbolOutOfRange {
                symbol,
                position,
                alphabet: alphabet_size,
            });
        }
        counts[symbol] += 1;
    }
    Distribution::from_counts(&counts)
}

/// Expected per-letter cost `Σ P(x) b(x)`.
pub fn average_cost(dist: &Distribution, problem: &SensingProblem) -> Result<f64> {
    problem.check_input_len(dist.len())?;
    Ok(dist
        .probs()
        .iter()
        .zip(problem.cost())
        .map(|(p, b)| p * b)
        .sum())
}

fn parse_real(token: &str, line: usize) -> Result<f64> {
    let value: f64 = token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("expected a real number, found `{token}`"),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("`{token}` is not finite"),
        });
    }
    Ok(value)
}

fn parse_reals(tokens: &[&str], expected: usize, line: usize) -> Result<Vec<f64>> {
    if tokens.len() != expected {
        return Err(Error::Parse {
            line,
            message: format!("expected {expected} values, found {}", tokens.len()),
        });
    }
    tokens.iter().map(|t| parse_real(t, line)).collect()
}

/// Parses a comma- or whitespace-separated probability vector such as
/// `0.3,0.7`. Sums within 1e-9 of one are rescaled.
pub fn parse_distribution(text: &str) -> Result<Distribution> {
    let probs = text
        .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| parse_real(t, 1))
        .collect::<Result<Vec<_>>>()?;
    Distribution::normalized(probs)
}

#[derive(Default)]
struct Sections {
    x: Option<usize>,
    z: Option<usize>,
    y: Option<usize>,
    comm: Option<Vec<Vec<f64>>>,
    w: Option<Vec<Vec<f64>>>,
    v: Option<Vec<Vec<f64>>>,
    cost: Option<Vec<f64>>,
    budget: Option<f64>,
}

/// Parses the line-oriented problem-file format and validates the result.
///
/// ```text
/// x_alphabet 2
/// z_alphabet 2
/// y_alphabet 2
/// comm_channel
/// 0.89 0.11
/// 0.11 0.89
/// sensing_channel_0
/// 0.9 0.1
/// 0.9 0.1
/// sensing_channel_1
/// 0.9 0.1
/// 0.1 0.9
/// cost 0 1
/// budget 0.7
/// ```
pub fn parse_problem(text: &str) -> Result<SensingProblem> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let mut s = Sections::default();
    let dup = |line: usize, key: &str| Error::Parse {
        line,
        message: format!("duplicate `{key}`"),
    };
    let need = |line: usize, what: &str| Error::Parse {
        line,
        message: format!("`{what}` must be declared first"),
    };

    while let Some((line, content)) = lines.next() {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let (key, args) = (tokens[0], &tokens[1..]);
        match key {
            "x_alphabet" | "z_alphabet" | "y_alphabet" => {
                let [arg] = args else {
                    return Err(Error::Parse {
                        line,
                        message: format!("`{key}` takes one integer"),
                    });
                };
                let size: usize = arg.parse().ok().filter(|&n| n >= 1).ok_or(Error::Parse {
                    line,
                    message: format!("alphabet size must be a positive integer, found `{arg}`"),
                })?;
                let slot = match key {
                    "x_alphabet" => &mut s.x,
                    "z_alphabet" => &mut s.z,
                    _ => &mut s.y,
                };
                if slot.replace(size).is_some() {
                    return Err(dup(line, key));
                }
            }
            "comm_channel" | "sensing_channel_0" | "sensing_channel_1" => {
                if !args.is_empty() {
                    return Err(Error::Parse {
                        line,
                        message: format!("`{key}` must be alone on its line"),
                    });
                }
                let inputs = s.x.ok_or_else(|| need(line, "x_alphabet"))?;
                let outputs = if key == "comm_channel" {
                    s.z.ok_or_else(|| need(line, "z_alphabet"))?
                } else {
                    s.y.ok_or_else(|| need(line, "y_alphabet"))?
                };
                let mut rows = Vec::new();
                for _ in 0..inputs {
                    let (row_line, row) = lines.next().ok_or(Error::Parse {
                        line,
                        message: format!("`{key}` needs {inputs} rows"),
                    })?;
                    let tokens: Vec<&str> = row.split_whitespace().collect();
                    rows.push(parse_reals(&tokens, outputs, row_line)?);
                }
                let slot = match key {
                    "comm_channel" => &mut s.comm,
                    "sensing_channel_0" => &mut s.w,
                    _ => &mut s.v,
                };
                if slot.replace(rows).is_some() {
                    return Err(dup(line, key));
                }
            }
            "cost" => {
                let inputs = s.x.ok_or_else(|| need(line, "x_alphabet"))?;
                if s.cost.replace(parse_reals(args, inputs, line)?).is_some() {
                    return Err(dup(line, key));
                }
            }
            "budget" => {
                let value = parse_reals(args, 1, line)?[0];
                if s.budget.replace(value).is_some() {
                    return Err(dup(line, key));
                }
            }
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown keyword `{other}`"),
                })
            }
        }
    }

    let end = text.lines().count().max(1);
    let missing = |what: &str| Error::Parse {
        line: end,
        message: format!("missing `{what}`"),
    };
    let comm = s.comm.ok_or_else(|| missing("comm_channel"))?;
    let w = s.w.ok_or_else(|| missing("sensing_channel_0"))?;
    let v = s.v.ok_or_else(|| missing("sensing_channel_1"))?;
    let cost = s.cost.ok_or_else(|| missing("cost"))?;
    let budget = s.budget.ok_or_else(|| missing("budget"))?;
    SensingProblem::new(
        ChannelMatrix::new("comm_channel", comm)?,
        ChannelMatrix::new("sensing_channel_0", w)?,
        ChannelMatrix::new("sensing_channel_1", v)?,
        cost,
        budget,
    )
}

fn write_matrix(f: &mut fmt::Formatter<'_>, name: &str, m: &ChannelMatrix) -> fmt::Result {
    writeln!(f, "{name}")?;
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|p| format!("{p:?}")).collect();
        writeln!(f, "{}", cells.join(" "))?;
    }
    Ok(())
}

/// Serializes to the problem-file format; `parse_problem` reads it back
/// bit-for-bit.
impl fmt::Display for SensingProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "x_alphabet {}", self.input_size())?;
        writeln!(f, "z_alphabet {}", self.comm.outputs())?;
        writeln!(f, "y_alphabet {}", self.w.outputs())?;
        write_matrix(f, "comm_channel", &self.comm)?;
        write_matrix(f, "sensing_channel_0", &self.w)?;
        write_matrix(f, "sensing_channel_1", &self.v)?;
        let cost: Vec<String> = self.cost.iter().map(|c| format!("{c:?}")).collect();
        writeln!(f, "cost {}", cost.join(" "))?;
        writeln!(f, "budget {:?}", self.budget)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE_ONE: &str = "\
# binary on-off sensing
x_alphabet 2
z_alphabet 2
y_alphabet 2
comm_channel            # BSC(0.11)
0.89 0.11
0.11 0.89
sensing_channel_0
0.9 0.1
0.9 0.1
sensing_channel_1
0.9 0.1
0.1 0.9
cost 0 1
budget 0.7
";

    #[test]
    fn parses_on_off_problem() {
        let p = parse_problem(EXAMPLE_ONE).unwrap();
        assert_eq!(p.input_size(), 2);
        assert_eq!(p.comm().row(0), &[0.89, 0.11]);
        assert_eq!(p.w().row(1), &[0.9, 0.1]);
        assert_eq!(p.v().row(1), &[0.1, 0.9]);
        assert_eq!(p.cost(), &[0.0, 1.0]);
        assert_eq!(p.budget(), 0.7);
    }

    #[test]
    fn parses_degenerate_identity() {
        let text = "x_alphabet 1\nz_alphabet 1\ny_alphabet 1\ncomm_channel\n1\n\
                    sensing_channel_0\n1\nsensing_channel_1\n1\ncost 0\nbudget 0\n";
        let p = parse_problem(text).unwrap();
        assert_eq!(p.input_size(), 1);
        assert_eq!(p.budget(), 0.0);
    }

    #[test]
    fn rejects_one_sided_zero() {
        let text = EXAMPLE_ONE.replace("0.1 0.9\ncost", "0 1\ncost");
        match parse_problem(&text) {
            Err(Error::Positivity { x: 1, y: 0, .. }) => {}
            other => panic!("expected positivity error, got {other:?}"),
        }
    }

    #[test]
    fn reports_non_stochastic_row() {
        let text = EXAMPLE_ONE.replace("0.11 0.89", "0.11 0.88");
        match parse_problem(&text) {
            Err(Error::NotStochastic { row: 1, sum, .. }) => assert!((sum - 0.99).abs() < 1e-12),
            other => panic!("expected stochasticity error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_infeasible_budget() {
        let text = EXAMPLE_ONE.replace("cost 0 1", "cost 1 2");
        assert!(matches!(
            parse_problem(&text),
            Err(Error::InfeasibleBudget { .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let text = EXAMPLE_ONE.replace("budget 0.7", "budget seven");
        assert!(matches!(parse_problem(&text), Err(Error::Parse { line: 15, .. })));
        let text = EXAMPLE_ONE.replace("budget 0.7", "");
        assert!(matches!(parse_problem(&text), Err(Error::Parse { .. })));
        let text = EXAMPLE_ONE.replace("cost 0 1", "cost 0 inf");
        assert!(matches!(parse_problem(&text), Err(Error::Parse { .. })));
        assert!(parse_problem("comm_channel\n").is_err());
        assert!(parse_problem("").is_err());
    }

    #[test]
    fn tolerates_slightly_off_rows_and_renormalizes() {
        let text = EXAMPLE_ONE.replace("0.89 0.11\n0.11", "0.8900000001 0.11\n0.11");
        let p = parse_problem(&text).unwrap();
        let sum: f64 = p.comm().row(0).iter().sum();
        assert!((sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empirical_type_counts() {
        let t = empirical_type(&[0, 0, 1, 1], 2).unwrap();
        assert_eq!(t.probs(), &[0.5, 0.5]);
        assert_eq!(t.denominator(), Some(4));
        let t = empirical_type(&[1, 1, 1], 2).unwrap();
        assert_eq!(t.probs(), &[0.0, 1.0]);
        assert_eq!(t.denominator(), Some(3));
        assert_eq!(
            empirical_type(&[1, 1, 1], 2).unwrap(),
            empirical_type(&[1, 1, 1], 2).unwrap()
        );
        assert_eq!(
            empirical_type(&[0, 2], 2),
            Err(Error::SymbolOutOfRange {
                symbol: 2,
                position: 1,
                alphabet: 2
            })
        );
        assert_eq!(empirical_type(&[], 2), Err(Error::EmptySequence));
    }

    #[test]
    fn average_cost_is_linear() {
        let p = parse_problem(EXAMPLE_ONE).unwrap();
        let d = Distribution::new(vec![0.3, 0.7]).unwrap();
        assert!((average_cost(&d, &p).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(average_cost(&Distribution::degenerate(2, 1), &p).unwrap(), 1.0);
        let p2 = p.with_budget(0.7).unwrap();
        let p2 = SensingProblem::new(
            p2.comm().clone(),
            p2.w().clone(),
            p2.v().clone(),
            vec![2.0, 4.0],
            5.0,
        )
        .unwrap();
        assert_eq!(average_cost(&Distribution::uniform(2), &p2).unwrap(), 3.0);
        assert!(matches!(
            average_cost(&Distribution::uniform(3), &p),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn type_counts_round_trip() {
        let t = Distribution::from_counts(&[3, 7]).unwrap();
        assert_eq!(t.counts(10).unwrap(), vec![3, 7]);
        assert!(t.counts(7).is_err());
    }

    #[test]
    fn parses_distribution_text() {
        let d = parse_distribution("0.3,0.7").unwrap();
        assert_eq!(d.probs(), &[0.3, 0.7]);
        assert!(parse_distribution("0.3,0.6").is_err());
        assert!(parse_distribution("-0.1,1.1").is_err());
        assert!(parse_distribution("").is_err());
    }
}
