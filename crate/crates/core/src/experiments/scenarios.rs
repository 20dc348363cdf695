//! Built-in scenarios at desk scale.

use super::config::ScenarioConfig;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Run,
    Sweep,
}

pub struct Builtin {
    pub name: &'static str,
    pub kind: Kind,
    pub text: &'static str,
}

macro_rules! builtin {
    ($name:literal, $kind:expr) => {
        Builtin {
            name: $name,
            kind: $kind,
            text: include_str!(concat!("../../scenarios/", $name, ".cfg")),
        }
    };
}

pub const BUILTINS: &[Builtin] = &[
    builtin!("fig2a", Kind::Sweep),
    builtin!("fig2b", Kind::Sweep),
    builtin!("fig2c", Kind::Run),
    builtin!("fig2c-pi", Kind::Run),
    builtin!("fig3a-scaled", Kind::Run),
    builtin!("fig3a-inset", Kind::Run),
    builtin!("fig3b-scaled", Kind::Run),
    builtin!("fig4-scaled", Kind::Run),
    builtin!("figS1", Kind::Run),
    builtin!("figS2", Kind::Sweep),
];

pub fn find(name: &str) -> Option<&'static Builtin> {
    BUILTINS.iter().find(|b| b.name == name)
}

impl Builtin {
    pub fn config(&self) -> Result<ScenarioConfig> {
        ScenarioConfig::parse(self.text)
    }

    /// First comment line of the file.
    pub fn summary(&self) -> &'static str {
        self.text
            .lines()
            .next()
            .and_then(|l| l.strip_prefix('#'))
            .map(str::trim)
            .unwrap_or("")
    }
}
