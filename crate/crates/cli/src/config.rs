//! Run configuration.
//!
//! A config file is TOML with one table per subcommand. Every key has a
//! default, so an empty file is a valid config; `normalized` fills the
//! derived defaults (simulation window, monitored sites) so the emitted copy
//! states every value that was used.

use std::path::{Path, PathBuf};

use lampwalk_core::diagnostics::{GoodnessParams, LampSet};
use lampwalk_core::walks::MeasureSpec;
use lampwalk_core::{Error, Group, WreathProduct};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Simulate,
    Entropy,
    Diagnostics,
    Wordproblem,
    Embed,
    Report,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub seed: u64,
    pub group: GroupConfig,
    pub measure: MeasureSpec,
    pub simulate: SimulateConfig,
    pub entropy: EntropyConfig,
    pub diagnostics: DiagnosticsConfig,
    pub wordproblem: WordProblemConfig,
    pub embed: EmbedConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            seed: 1,
            group: GroupConfig::default(),
            measure: MeasureSpec::Sws,
            simulate: SimulateConfig::default(),
            entropy: EntropyConfig::default(),
            diagnostics: DiagnosticsConfig::default(),
            wordproblem: WordProblemConfig::default(),
            embed: EmbedConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

/// Ambient group `lamp ≀ base` in the short syntax `Z3`, `Z/2`, `F2`, `S2,3`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroupConfig {
    pub lamp: String,
    pub base: String,
}

impl Default for GroupConfig {
    fn default() -> Self {
        GroupConfig {
            lamp: "Z/2".into(),
            base: "Z1".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub n: usize,
    pub paths: usize,
    /// Inclusive window for modification counts; defaults to `[n/2, n]`.
    pub window: Option<[usize; 2]>,
    /// Base sites whose lamps are monitored; defaults to the identity.
    pub sites: Option<Vec<String>>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            n: 1000,
            paths: 100,
            window: None,
            sites: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntropyConfig {
    pub n_max: usize,
    /// Largest `|μ^{*n}|·|μ|` formed by one exact convolution.
    pub budget: usize,
    /// Walks per step once the budget is exhausted; 0 stops with a resource error instead.
    pub samples: usize,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        EntropyConfig {
            n_max: 10,
            budget: lampwalk_core::entropy::DEFAULT_BUDGET,
            samples: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    pub ns: Vec<usize>,
    pub paths: usize,
    /// Proxy horizon `T = t_ratio·n`.
    pub t_ratio: usize,
    pub t0: Vec<usize>,
    pub r: Vec<u64>,
    /// Lamp radii `λ`; used only for `ℤᵈ` lamps, finite lamps admit every value.
    pub lambda: Vec<u64>,
    pub verify: bool,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            ns: vec![100, 400],
            paths: 50,
            t_ratio: 10,
            t0: vec![2, 5],
            r: vec![1, 2],
            lambda: vec![1],
            verify: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WordProblemConfig {
    /// Group in which words are compared.
    pub group: String,
    /// Input file; standard input when absent.
    pub input: Option<PathBuf>,
}

impl Default for WordProblemConfig {
    fn default() -> Self {
        WordProblemConfig {
            group: "S2,2".into(),
            input: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedConfig {
    /// Quotient `F_d/N`; images land in `ℤᵈ ≀ quotient`.
    pub quotient: String,
    pub input: Option<PathBuf>,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        EmbedConfig {
            quotient: "Z2".into(),
            input: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub format: Format,
}

fn invalid(field: &str, message: impl Into<String>) -> CliError {
    CliError::Core(Error::validation(field, message))
}

/// Parses a group spec, attributing failures to `field`.
pub fn parse_group(field: &str, text: &str) -> Result<Group, CliError> {
    text.parse::<Group>()
        .map_err(|e| invalid(field, format!("{text:?}: {e}")))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn ambient(&self) -> Result<WreathProduct, CliError> {
        Ok(WreathProduct::new(
            parse_group("group.lamp", &self.group.lamp)?,
            parse_group("group.base", &self.group.base)?,
        ))
    }

    /// Goodness parameters of the diagnostics grid, in `t0`, `r`, `λ` order.
    pub fn goodness_grid(&self, lamp: &Group) -> Result<Vec<GoodnessParams>, CliError> {
        let d = &self.diagnostics;
        let lambdas: Vec<LampSet> = match lamp {
            Group::IntVector { .. } => d.lambda.iter().map(|&l| LampSet::Ball(l)).collect(),
            _ => vec![LampSet::Whole],
        };
        let mut grid = Vec::new();
        for &t0 in &d.t0 {
            for &r in &d.r {
                for &lamps in &lambdas {
                    grid.push(GoodnessParams::new(t0, r, lamps).map_err(|_| invalid("diagnostics.t0", "entries must be at least 1"))?);
                }
            }
        }
        Ok(grid)
    }

    /// Checks every field used by `command` and fills derived defaults.
    pub fn normalized(mut self, command: Command) -> Result<Self, CliError> {
        self.command = Some(command);
        match command {
            Command::Simulate => {
                let wreath = self.ambient()?;
                let s = &mut self.simulate;
                if s.paths == 0 {
                    return Err(invalid("simulate.paths", "must be at least 1"));
                }
                if s.n == 0 {
                    return Err(invalid("simulate.n", "must be at least 1"));
                }
                let [lo, hi] = *s.window.get_or_insert([s.n / 2, s.n]);
                if lo > hi || hi > s.n {
                    return Err(invalid("simulate.window", format!("[{lo}, {hi}] must be an interval inside [0, {}]", s.n)));
                }
                let sites = s.sites.get_or_insert_with(|| vec![wreath.base.identity().to_string()]);
                if matches!(wreath.base, Group::Solvable { .. }) && !sites.is_empty() {
                    // Solvable elements have no round-trippable text form.
                    sites.clear();
                }
                for site in sites.iter() {
                    wreath
                        .base
                        .parse_element(site)
                        .map_err(|e| invalid("simulate.sites", e.to_string()))?;
                }
            }
            Command::Entropy => {
                self.ambient()?;
                if self.entropy.n_max == 0 {
                    return Err(invalid("entropy.n_max", "must be at least 1"));
                }
                if self.entropy.budget == 0 {
                    return Err(invalid("entropy.budget", "must be at least 1"));
                }
            }
            Command::Diagnostics => {
                let wreath = self.ambient()?;
                let d = &self.diagnostics;
                if d.paths == 0 {
                    return Err(invalid("diagnostics.paths", "must be at least 1"));
                }
                if d.t_ratio == 0 {
                    return Err(invalid("diagnostics.t_ratio", "must be at least 1"));
                }
                if d.ns.is_empty() || d.ns.contains(&0) {
                    return Err(invalid("diagnostics.ns", "must be a nonempty list of positive integers"));
                }
                if d.t0.is_empty() || d.r.is_empty() {
                    return Err(invalid("diagnostics.t0", "t0 and r must be nonempty"));
                }
                if matches!(wreath.lamp, Group::IntVector { .. }) && d.lambda.is_empty() {
                    return Err(invalid("diagnostics.lambda", "must be nonempty for Z^d lamps"));
                }
                self.goodness_grid(&wreath.lamp)?;
            }
            Command::Wordproblem => {
                parse_group("wordproblem.group", &self.wordproblem.group)?;
            }
            Command::Embed => {
                parse_group("embed.quotient", &self.embed.quotient)?;
            }
            Command::Report => {}
        }
        Ok(self)
    }
}
