//! Fixed declarations of the logic theory, as shown by the explorer.

/// A theory declaration: the names it declares and its display text.
#[derive(Clone, Copy, Debug)]
pub struct TheoryDecl {
    pub names: &'static [&'static str],
    pub text: &'static str,
}

pub const DECLARATIONS: &[TheoryDecl] = &[
    TheoryDecl {
        names: &[
            "character__init_wrapper",
            "character__init_wrapper'mk",
            "rec__value",
            "__attr__init",
        ],
        text: "type character__init_wrapper =\n  | character__init_wrapper'mk (rec__value:character) (__attr__init:bool)",
    },
    TheoryDecl {
        names: &["character__init_wrapper___attr__init__projection"],
        text: "function character__init_wrapper___attr__init__projection (a1:\n  character__init_wrapper) : bool = __attr__init a1",
    },
    TheoryDecl {
        names: &["character__init_wrapper__rec__value__projection"],
        text: "function character__init_wrapper__rec__value__projection (a1:\n  character__init_wrapper) : character = rec__value a1",
    },
    TheoryDecl {
        names: &["to_wrapper"],
        text: "function to_wrapper (x:character) : character__init_wrapper =\n  character__init_wrapper'mk x True",
    },
    TheoryDecl {
        names: &["of_wrapper_map"],
        text: "function of_wrapper_map (f:int -> character__init_wrapper) : int -> character =\n  fun i -> rec__value (f i)",
    },
    TheoryDecl {
        names: &["get2"],
        text: "function get2 (f:'a -> 'b) (x:'a) : 'b = f \\@ x",
    },
    TheoryDecl {
        names: &["set2"],
        text: "function set2 (f:'a -> 'b) (x:'a) (v:'b) : 'a -> 'b =\n  fun y -> if y = x then v else f \\@ y",
    },
    TheoryDecl {
        names: &["const"],
        text: "function const (v:'b) : 'a -> 'b = fun _ -> v",
    },
];

/// Declaration introducing `name`, if any.
pub fn lookup(name: &str) -> Option<&'static TheoryDecl> {
    DECLARATIONS.iter().find(|d| d.names.contains(&name))
}

/// Identifier tokens of a text (letters, digits, `_` and `'`).
pub fn tokens(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '_' || c == '\''))
        .filter(|t| !t.is_empty())
}

/// Whether `text` mentions `name` as a whole token.
pub fn mentions(text: &str, name: &str) -> bool {
    tokens(text).any(|t| t == name)
}
