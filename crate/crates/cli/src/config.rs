use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
    Ascii,
}

#[derive(Debug, Parser)]
#[command(name = "ehpseq", version, about = "Unstable Ext of spheres via Brown-Gitler resolutions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Output format
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output here instead of stdout
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Directory for resolution files
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Worker threads
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct Window {
    /// Largest cohomological degree s
    #[arg(long, default_value_t = 8)]
    pub max_s: usize,
    /// Largest internal degree t
    #[arg(long, default_value_t = 14)]
    pub max_t: u32,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emit the resolution file of BG(t)
    Resolve {
        #[arg(long, short = 'n')]
        sphere: u32,
        #[arg(long, default_value_t = 8)]
        max_s: usize,
    },
    /// Emit the E2 chart read off the resolutions
    Ext {
        #[arg(long, short = 'n')]
        sphere: Option<u32>,
        #[command(flatten)]
        window: Window,
    },
    /// Emit the EHP report for S^n -> S^{n+1}
    Ehp {
        #[arg(long, short = 'n')]
        sphere: u32,
        #[command(flatten)]
        window: Window,
    },
    /// Emit the Lambda-algebra chart
    Lambda {
        #[arg(long, short = 'n')]
        sphere: u32,
        #[command(flatten)]
        window: Window,
        /// Include cycle representatives
        #[arg(long)]
        representatives: bool,
    },
    /// Diff both pipelines over a window
    Compare {
        #[arg(long, default_value_t = 8)]
        n_max: u32,
        #[command(flatten)]
        window: Window,
    },
    /// Run the ∂², exactness and d² suites
    Check {
        #[command(flatten)]
        window: Window,
        /// Largest internal degree for realized exactness
        #[arg(long, default_value_t = 20)]
        max_d: u32,
    },
}

/// A validated job.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobConfig {
    pub command: CommandKind,
    pub sphere: Option<u32>,
    pub s_max: usize,
    pub t_max: u32,
    pub d_max: u32,
    pub n_max: u32,
    pub representatives: bool,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Resolve,
    Ext,
    Ehp,
    Lambda,
    Compare,
    Check,
}

impl JobConfig {
    pub fn from_cli(cli: Cli) -> Result<JobConfig, String> {
        let mut config = JobConfig {
            command: CommandKind::Check,
            sphere: None,
            s_max: 8,
            t_max: 14,
            d_max: 20,
            n_max: 8,
            representatives: false,
            format: Format::Tsv,
            output: cli.common.output,
            cache_dir: cli.common.cache_dir,
        };
        let default_format = match cli.command {
            Command::Resolve { sphere, max_s } => {
                config.command = CommandKind::Resolve;
                config.sphere = Some(sphere);
                config.s_max = max_s;
                Format::Json
            }
            Command::Ext { sphere, window } => {
                config.command = CommandKind::Ext;
                config.sphere = sphere;
                config.window(window);
                Format::Tsv
            }
            Command::Ehp { sphere, window } => {
                config.command = CommandKind::Ehp;
                config.sphere = Some(sphere);
                config.window(window);
                Format::Json
            }
            Command::Lambda {
                sphere,
                window,
                representatives,
            } => {
                config.command = CommandKind::Lambda;
                config.sphere = Some(sphere);
                config.representatives = representatives;
                config.window(window);
                Format::Tsv
            }
            Command::Compare { n_max, window } => {
                config.command = CommandKind::Compare;
                config.n_max = n_max;
                config.window(window);
                Format::Tsv
            }
            Command::Check { window, max_d } => {
                config.command = CommandKind::Check;
                config.d_max = max_d;
                config.window(window);
                Format::Tsv
            }
        };
        config.format = cli.common.format.unwrap_or(default_format);
        config.validate()?;
        Ok(config)
    }

    fn window(&mut self, w: Window) {
        self.s_max = w.max_s;
        self.t_max = w.max_t;
    }

    fn validate(&self) -> Result<(), String> {
        if self.sphere == Some(0) {
            return Err("--sphere must be positive".into());
        }
        if self.t_max == 0 || self.n_max == 0 {
            return Err("bounds must be positive".into());
        }
        if let Some(n) = self.sphere {
            if self.command != CommandKind::Resolve && n > self.t_max {
                return Err(format!("--sphere {n} exceeds --max-t {}", self.t_max));
            }
        }
        if self.command == CommandKind::Compare && self.n_max > self.t_max {
            return Err("--n-max exceeds --max-t".into());
        }
        let allowed: &[Format] = match self.command {
            CommandKind::Resolve => &[Format::Json],
            CommandKind::Ext => &[Format::Json, Format::Tsv, Format::Ascii],
            CommandKind::Lambda => &[Format::Json, Format::Tsv, Format::Ascii],
            CommandKind::Ehp | CommandKind::Compare | CommandKind::Check => &[Format::Json, Format::Tsv],
        };
        if !allowed.contains(&self.format) {
            return Err(format!("format {:?} is not available for this command", self.format));
        }
        if self.format == Format::Ascii && self.sphere.is_none() {
            return Err("ascii charts need --sphere".into());
        }
        Ok(())
    }
}
