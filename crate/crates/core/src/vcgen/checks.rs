use std::fmt;

use serde::Serialize;

use crate::syntax::{Expr, SourceSpan};

/// Language-mandated checks. Each kind has a fixed message and reason.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    ArrayIndex,
    Range,
    Overflow,
    Division,
    Precondition,
    Postcondition,
    LoopInvariantInit,
    LoopInvariantPreserve,
    Assertion,
    InitCheck,
    VariantDecrease,
}

impl CheckKind {
    pub const ALL: [CheckKind; 11] = [
        CheckKind::ArrayIndex,
        CheckKind::Range,
        CheckKind::Overflow,
        CheckKind::Division,
        CheckKind::Precondition,
        CheckKind::Postcondition,
        CheckKind::LoopInvariantInit,
        CheckKind::LoopInvariantPreserve,
        CheckKind::Assertion,
        CheckKind::InitCheck,
        CheckKind::VariantDecrease,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::ArrayIndex => "array_index",
            CheckKind::Range => "range",
            CheckKind::Overflow => "overflow",
            CheckKind::Division => "division",
            CheckKind::Precondition => "precondition",
            CheckKind::Postcondition => "postcondition",
            CheckKind::LoopInvariantInit => "loop_invariant_init",
            CheckKind::LoopInvariantPreserve => "loop_invariant_preserve",
            CheckKind::Assertion => "assertion",
            CheckKind::InitCheck => "init_check",
            CheckKind::VariantDecrease => "variant_decrease",
        }
    }

    /// Main message text. Initialization checks name their variable.
    pub fn message(self, variable: Option<&str>) -> String {
        match self {
            CheckKind::ArrayIndex => "array index check might fail".into(),
            CheckKind::Range => "range check might fail".into(),
            CheckKind::Overflow => "overflow check might fail".into(),
            CheckKind::Division => "divide by zero might fail".into(),
            CheckKind::Precondition => "precondition might fail".into(),
            CheckKind::Postcondition => "postcondition might fail".into(),
            CheckKind::LoopInvariantInit => "loop invariant might fail in first iteration".into(),
            CheckKind::LoopInvariantPreserve => {
                "loop invariant might not be preserved by an arbitrary iteration".into()
            }
            CheckKind::Assertion => "assertion might fail".into(),
            CheckKind::InitCheck => {
                format!("\"{}\" might not be initialized", variable.unwrap_or("value"))
            }
            CheckKind::VariantDecrease => "subprogram variant might fail".into(),
        }
    }

    pub fn reason(self) -> &'static str {
        match self {
            CheckKind::ArrayIndex => "value must be a valid index into the array",
            CheckKind::Range => "value must fit in the target type",
            CheckKind::Overflow => "result of operation must fit in a 32-bit machine integer",
            CheckKind::Division => "divisor must be nonzero",
            CheckKind::Precondition => "precondition of the called subprogram must hold",
            CheckKind::Postcondition => "postcondition must hold on return",
            CheckKind::LoopInvariantInit => "loop invariant must hold on entry to the loop",
            CheckKind::LoopInvariantPreserve => "loop invariant must be preserved by each iteration",
            CheckKind::Assertion => "assertion must hold",
            CheckKind::InitCheck => "value must be initialized before it is read",
            CheckKind::VariantDecrease => "variant must decrease at each recursive call",
        }
    }

    /// Run-time checks print their reason; property checks do not.
    pub fn is_runtime(self) -> bool {
        matches!(
            self,
            CheckKind::ArrayIndex
                | CheckKind::Range
                | CheckKind::Overflow
                | CheckKind::Division
                | CheckKind::InitCheck
        )
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One check site in a subprogram.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckObligation {
    /// `file:line:col:kind:ordinal`
    pub id: String,
    pub kind: CheckKind,
    pub span: SourceSpan,
    #[serde(skip)]
    pub expr: Expr,
    pub subprogram: String,
    /// Variable named by initialization checks.
    pub variable: Option<String>,
}
