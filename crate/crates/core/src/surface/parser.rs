use std::collections::BTreeSet;

use super::lexer::{lex, Tok};
use super::{Span, SurfaceError, SurfaceErrorKind};
use crate::pasting::{Pos, Tree};

const MAX_DEPTH: usize = 256;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SourceFile {
    pub decls: Vec<Decl>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    Computad { name: String, gens: Vec<GenDecl>, span: Span },
    Let { name: String, expr: Expr, span: Span },
    Assert { name: String, ty: TypeExpr, span: Span },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenDecl {
    pub name: String,
    pub ty: TypeExpr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeExpr {
    Star,
    Arrow(Expr, Expr),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Name(String),
    Comp { k: Option<usize>, args: Vec<Expr> },
    Id(Box<Expr>),
    Coh { tree: Tree, src: Box<Expr>, tgt: Box<Expr>, args: Option<Vec<(Pos, Expr)>> },
    Suspend(Box<Expr>),
    Opposite(Box<Expr>, BTreeSet<usize>),
    Functorialise(Box<Expr>, Vec<Pos>),
    Rebias(Box<Expr>),
    Inverse(Box<Expr>),
    Unit(Box<Expr>),
    Counit(Box<Expr>),
}

pub fn parse(text: &str) -> Result<SourceFile, SurfaceError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0, depth: 0 };
    let mut decls = Vec::new();
    while p.peek() != &Tok::Eof {
        decls.push(p.decl()?);
    }
    Ok(SourceFile { decls })
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    at: usize,
    depth: usize,
}

fn syntax(span: Span, msg: String) -> SurfaceError {
    SurfaceError::new(span, SurfaceErrorKind::Syntax(msg))
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }


    fn span(&self) -> Span {
        self.toks[self.at].1
    }

    fn next(&mut self) -> (Tok, Span) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Span, SurfaceError> {
        let (t, span) = self.next();
        if t == want {
            Ok(span)
        } else {
            Err(syntax(span, format!("expected {want} {what}, found {t}")))
        }
    }

    fn close(&mut self, want: Tok, open: Span) -> Result<(), SurfaceError> {
        let (t, span) = self.next();
        if t == want {
            return Ok(());
        }
        let at = if t == Tok::Eof { open } else { span };
        Err(syntax(at, format!("expected {want} to close the delimiter opened at {open}, found {t}")))
    }

    fn ident(&mut self, what: &str) -> Result<(String, Span), SurfaceError> {
        match self.next() {
            (Tok::Ident(s), span) => Ok((s, span)),
            (t, span) => Err(syntax(span, format!("expected {what}, found {t}"))),
        }
    }

    fn decl(&mut self) -> Result<Decl, SurfaceError> {
        let (kw, span) = self.ident("a declaration")?;
        match kw.as_str() {
            "computad" => {
                let (name, _) = self.ident("a computad name")?;
                let open = self.expect(Tok::LBrace, "after the computad name")?;
                let mut gens = Vec::new();
                while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
                    let (name, span) = self.ident("a generator name")?;
                    self.expect(Tok::Colon, "after the generator name")?;
                    let ty = self.ty()?;
                    self.expect(Tok::Semi, "after the generator type")?;
                    gens.push(GenDecl { name, ty, span });
                }
                self.close(Tok::RBrace, open)?;
                Ok(Decl::Computad { name, gens, span })
            }
            "let" => {
                let (name, _) = self.ident("a name")?;
                self.expect(Tok::Equals, "after the name")?;
                let expr = self.expr()?;
                Ok(Decl::Let { name, expr, span })
            }
            "assert" => {
                let (name, _) = self.ident("a name")?;
                self.expect(Tok::Colon, "after the name")?;
                let ty = self.ty()?;
                Ok(Decl::Assert { name, ty, span })
            }
            _ => Err(syntax(span, format!("expected `computad`, `let` or `assert`, found `{kw}`"))),
        }
    }

    fn ty(&mut self) -> Result<TypeExpr, SurfaceError> {
        if self.peek() == &Tok::Star {
            self.next();
            return Ok(TypeExpr::Star);
        }
        let s = self.expr()?;
        self.expect(Tok::Arrow, "between source and target")?;
        let t = self.expr()?;
        Ok(TypeExpr::Arrow(s, t))
    }

    fn expr(&mut self) -> Result<Expr, SurfaceError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(syntax(self.span(), "expression nested too deeply".into()));
        }
        let r = self.expr_inner();
        self.depth -= 1;
        r
    }

    fn expr_inner(&mut self) -> Result<Expr, SurfaceError> {
        let (head, span) = self.ident("an expression")?;
        let mk = |kind| Ok(Expr { kind, span });
        if head == "coh" && self.peek() == &Tok::LBracket {
            return self.coh(span);
        }
        if self.peek() != &Tok::LParen || !is_operator(&head) {
            return mk(ExprKind::Name(head));
        }
        let open = self.next().1;
        let kind = if head == "comp" || head.starts_with("comp_") {
            let k = if head == "comp" {
                None
            } else {
                Some(head[5..].parse().map_err(|_| syntax(span, format!("bad composite index in `{head}`")))?)
            };
            let mut args = vec![self.expr()?];
            while self.peek() == &Tok::Comma {
                self.next();
                args.push(self.expr()?);
            }
            ExprKind::Comp { k, args }
        } else {
            let e = Box::new(self.expr()?);
            match head.as_str() {
                "id" => ExprKind::Id(e),
                "S" => ExprKind::Suspend(e),
                "R" => ExprKind::Rebias(e),
                "I" => ExprKind::Inverse(e),
                "U" => ExprKind::Unit(e),
                "CU" => ExprKind::Counit(e),
                "O" => {
                    self.expect(Tok::Comma, "before the dimension set")?;
                    let dims = self.braced(|p| match p.next() {
                        (Tok::Int(n), _) => Ok(n),
                        (t, span) => Err(syntax(span, format!("expected a dimension, found {t}"))),
                    })?;
                    ExprKind::Opposite(e, dims.into_iter().collect())
                }
                "Fn" => {
                    self.expect(Tok::Comma, "before the position set")?;
                    let pos = self.braced(|p| p.position())?;
                    ExprKind::Functorialise(e, pos)
                }
                _ => unreachable!("operator list"),
            }
        };
        self.close(Tok::RParen, open)?;
        mk(kind)
    }

    fn braced<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<T, SurfaceError>) -> Result<Vec<T>, SurfaceError> {
        let open = self.expect(Tok::LBrace, "to open a set")?;
        let mut out = Vec::new();
        if self.peek() != &Tok::RBrace {
            out.push(item(self)?);
            while self.peek() == &Tok::Comma {
                self.next();
                out.push(item(self)?);
            }
        }
        self.close(Tok::RBrace, open)?;
        Ok(out)
    }

    fn position(&mut self) -> Result<Pos, SurfaceError> {
        let (name, span) = self.ident("a position")?;
        name.parse().map_err(|_| syntax(span, format!("`{name}` is not a position name")))
    }

    fn tree(&mut self) -> Result<Tree, SurfaceError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(syntax(self.span(), "tree nested too deeply".into()));
        }
        let open = self.expect(Tok::LBracket, "to open a tree")?;
        let mut branches = Vec::new();
        if self.peek() != &Tok::RBracket {
            branches.push(self.tree_or_unclosed(open)?);
            while self.peek() == &Tok::Comma {
                self.next();
                branches.push(self.tree_or_unclosed(open)?);
            }
        }
        match self.next() {
            (Tok::RBracket, _) => {}
            (t, _) => return Err(syntax(open, format!("unclosed `[` in tree, found {t}"))),
        }
        self.depth -= 1;
        Ok(Tree::new(branches))
    }

    fn tree_or_unclosed(&mut self, open: Span) -> Result<Tree, SurfaceError> {
        if self.peek() != &Tok::LBracket {
            let (t, _) = self.next();
            return Err(syntax(open, format!("unclosed `[` in tree, found {t}")));
        }
        self.tree()
    }

    fn coh(&mut self, span: Span) -> Result<Expr, SurfaceError> {
        let open = self.expect(Tok::LBracket, "after `coh`")?;
        let tree = match self.peek() {
            Tok::LBracket => self.tree()?,
            t => return Err(syntax(self.span(), format!("expected a tree, found {t}"))),
        };
        match self.next() {
            (Tok::Semi, _) => {}
            (t, _) => return Err(syntax(open, format!("unbalanced brackets in `coh[` tree, found {t}"))),
        }
        let src = Box::new(self.expr()?);
        self.expect(Tok::DArrow, "between source and target")?;
        let tgt = Box::new(self.expr()?);
        self.close(Tok::RBracket, open)?;
        let args = if self.peek() == &Tok::LParen {
            let open = self.next().1;
            let mut args = Vec::new();
            if self.peek() != &Tok::RParen {
                loop {
                    let p = self.position()?;
                    self.expect(Tok::Assign, "after the position")?;
                    args.push((p, self.expr()?));
                    if self.peek() != &Tok::Comma {
                        break;
                    }
                    self.next();
                }
            }
            self.close(Tok::RParen, open)?;
            Some(args)
        } else {
            None
        };
        Ok(Expr { kind: ExprKind::Coh { tree, src, tgt, args }, span })
    }
}

fn is_operator(head: &str) -> bool {
    matches!(head, "comp" | "id" | "S" | "O" | "Fn" | "R" | "I" | "U" | "CU")
        || head.strip_prefix("comp_").is_some_and(|k| !k.is_empty() && k.bytes().all(|b| b.is_ascii_digit()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file() {
        assert_eq!(parse("").unwrap(), SourceFile::default());
        assert_eq!(parse("# only a comment\n").unwrap(), SourceFile::default());
    }

    #[test]
    fn declarations() {
        let f = parse("computad C { x : *; f : x -> x; }\nlet i = comp_0(f, id(x))\nassert i : x -> x").unwrap();
        assert_eq!(f.decls.len(), 3);
        let Decl::Let { expr, .. } = &f.decls[1] else { panic!() };
        let ExprKind::Comp { k: Some(0), args } = &expr.kind else { panic!() };
        assert!(matches!(args[1].kind, ExprKind::Id(_)));
    }

    #[test]
    fn coherence_syntax() {
        let f = parse("let u = coh[[[],[]]; comp(p1/0, p2/0) => p1/0](p1/0 := f, p2/0 := id(y))").unwrap();
        let Decl::Let { expr, .. } = &f.decls[0] else { panic!() };
        let ExprKind::Coh { tree, args, .. } = &expr.kind else { panic!() };
        assert_eq!(tree.to_string(), "[[],[]]");
        assert_eq!(args.as_ref().unwrap().len(), 2);
        let bare = parse("let u = Fn(coh[[[]]; p1/0 => p1/0], {p1/0})").unwrap();
        assert_eq!(bare.decls.len(), 1);
    }

    #[test]
    fn unbalanced_bracket_location() {
        let e = parse("let u = coh[[[]; p1/0 => p1/0](p1/0 := f)").unwrap_err();
        assert_eq!(e.span, Span { line: 1, col: 13 });
        let e = parse("let u = comp(a,\n   b").unwrap_err();
        assert_eq!(e.span, Span { line: 1, col: 13 });
        let e = parse("let u = comp(a, b]").unwrap_err();
        assert_eq!(e.span, Span { line: 1, col: 18 });
    }

    #[test]
    fn names_that_look_like_operators() {
        let f = parse("let S = I\nlet comp_x = comp_x").unwrap();
        assert_eq!(f.decls.len(), 2);
    }

    #[test]
    fn deep_nesting_is_an_error() {
        let text = format!("let x = {}y{}", "id(".repeat(1000), ")".repeat(1000));
        assert!(parse(&text).is_err());
    }
}
