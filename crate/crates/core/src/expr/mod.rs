//! Component expressions: AST, evaluation, symbolic differentiation, parser.

mod ast;
mod parser;

pub use ast::{polynomial, Expr, Func};
pub use parser::{parse_expr, ExprError, VarScope};
