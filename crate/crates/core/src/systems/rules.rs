use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::term::{parse_term, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SystemId {
    #[serde(rename = "CLC0")]
    Clc0,
    #[serde(rename = "CLC")]
    Clc,
    #[serde(rename = "CLCPLUS")]
    ClcPlus,
    #[serde(rename = "R")]
    R,
}

impl SystemId {
    pub const ALL: [SystemId; 4] = [SystemId::Clc0, SystemId::Clc, SystemId::ClcPlus, SystemId::R];

    pub fn name(self) -> &'static str {
        match self {
            SystemId::Clc0 => "CLC0",
            SystemId::Clc => "CLC",
            SystemId::ClcPlus => "CLCPLUS",
            SystemId::R => "R",
        }
    }

    pub fn rules(self) -> &'static [Rule] {
        match self {
            SystemId::Clc0 => &CLC0,
            SystemId::Clc => &CLC,
            SystemId::ClcPlus => &CLC_PLUS,
            SystemId::R => &R,
        }
    }

    pub fn rule(self, id: u8) -> Option<&'static Rule> {
        self.rules().iter().find(|r| r.id == id)
    }

    /// Whether some rule has a condition.
    pub fn is_conditional(self) -> bool {
        self.rules().iter().any(|r| !r.condition.is_empty())
    }
}

impl std::fmt::Display for SystemId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SystemId {
    type Err = String;

    fn from_str(s: &str) -> Result<SystemId, String> {
        match s.to_ascii_uppercase().as_str() {
            "CLC0" => Ok(SystemId::Clc0),
            "CLC" => Ok(SystemId::Clc),
            "CLCPLUS" | "CLC+" => Ok(SystemId::ClcPlus),
            "R" => Ok(SystemId::R),
            other => Err(format!("unknown system `{}`", other)),
        }
    }
}

/// Which equality a condition atom refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EqualityOf {
    /// The equality of the system the rule belongs to (level-stratified).
    Own,
    /// Equality in CLC, independent of the owning system.
    Clc,
}

#[derive(Clone, Debug)]
pub struct CondAtom {
    pub equality: EqualityOf,
    pub left: Term,
    pub right: Term,
    pub negated: bool,
}

#[derive(Clone, Debug)]
pub struct Rule {
    pub id: u8,
    pub lhs: Term,
    pub rhs: Term,
    /// Conjunction of equalities and disequalities.
    pub condition: Vec<CondAtom>,
}

impl Rule {
    fn plain(id: u8, lhs: &str, rhs: &str) -> Rule {
        Rule {
            id,
            lhs: parse_term(lhs).unwrap(),
            rhs: parse_term(rhs).unwrap(),
            condition: Vec::new(),
        }
    }

    fn when(mut self, equality: EqualityOf, left: &str, right: &str, negated: bool) -> Rule {
        self.condition.push(CondAtom {
            equality,
            left: parse_term(left).unwrap(),
            right: parse_term(right).unwrap(),
            negated,
        });
        self
    }

    pub fn is_conditional(&self) -> bool {
        !self.condition.is_empty()
    }
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)?;
        for (i, c) in self.condition.iter().enumerate() {
            let sep = if i == 0 { " <= " } else { " /\\ " };
            let op = if c.negated { "!=" } else { "=" };
            let tag = match c.equality {
                EqualityOf::Own => "",
                EqualityOf::Clc => "_CLC",
            };
            write!(f, "{}{} {}{} {}", sep, c.left, op, tag, c.right)?;
        }
        Ok(())
    }
}

fn shared_tail() -> [Rule; 2] {
    [Rule::plain(4, "K x y", "x"), Rule::plain(5, "S x y z", "x z (y z)")]
}

static CLC0: LazyLock<Vec<Rule>> = LazyLock::new(|| {
    let mut v = vec![
        Rule::plain(1, "C T x y", "x"),
        Rule::plain(2, "C F x y", "y"),
        Rule::plain(3, "C z x x", "x"),
    ];
    v.extend(shared_tail());
    v
});

static CLC: LazyLock<Vec<Rule>> = LazyLock::new(|| {
    let mut v = vec![
        Rule::plain(1, "C T x y", "x"),
        Rule::plain(2, "C F x y", "y"),
        Rule::plain(3, "C z x y", "x").when(EqualityOf::Own, "x", "y", false),
    ];
    v.extend(shared_tail());
    v
});

static CLC_PLUS: LazyLock<Vec<Rule>> = LazyLock::new(|| {
    let mut v = CLC.clone();
    v.push(Rule::plain(6, "C z x y", "y").when(EqualityOf::Own, "x", "y", false));
    v
});

static R: LazyLock<Vec<Rule>> = LazyLock::new(|| {
    let mut v = vec![
        Rule::plain(1, "C T x y", "x"),
        Rule::plain(2, "C z x y", "y").when(EqualityOf::Clc, "z", "F", false),
        Rule::plain(3, "C z x y", "x")
            .when(EqualityOf::Clc, "z", "F", true)
            .when(EqualityOf::Clc, "x", "y", false),
    ];
    v.extend(shared_tail());
    v
});

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_have_expected_shape() {
        assert_eq!(SystemId::Clc0.rules().len(), 5);
        assert_eq!(SystemId::Clc.rules().len(), 5);
        assert_eq!(SystemId::ClcPlus.rules().len(), 6);
        assert_eq!(SystemId::R.rules().len(), 5);
        assert!(!SystemId::Clc0.is_conditional());
        assert_eq!(
            SystemId::R.rule(3).unwrap().to_string(),
            "C z x y -> x <= z !=_CLC F /\\ x =_CLC y"
        );
        assert_eq!(SystemId::Clc0.rule(3).unwrap().to_string(), "C z x x -> x");
        for sys in SystemId::ALL {
            for r in sys.rules() {
                let lv = r.lhs.variables();
                assert!(r.rhs.variables().iter().all(|v| lv.contains(v)));
            }
        }
    }
}
