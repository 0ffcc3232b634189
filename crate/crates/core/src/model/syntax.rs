//! Lexer and recursive-descent parser for the model language. Produces an
//! AST that keeps source positions for the semantic checks in `validate`.

use super::diagnostic::{Diagnostic, DiagnosticKind, Pos};
use super::Sign;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Colon,
    Dot,
    Comma,
    Arrow,
    Plus,
    Minus,
    Star,
    Equals,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Num(s) => format!("number `{s}`"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Equals => "`=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn syntax_error(pos: Pos, message: impl Into<String>) -> Diagnostic {
    Diagnostic::new(DiagnosticKind::Syntax, pos, message)
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, Diagnostic> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos::new(line, col);
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                bump!();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump!();
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while i < j {
                        bump!();
                    }
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        bump!();
                    }
                }
            }
            out.push((Tok::Num(chars[start..i].iter().collect()), pos));
            continue;
        }
        if c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                if i >= chars.len() {
                    return Err(syntax_error(pos, "unterminated string"));
                }
                match chars[i] {
                    '"' => {
                        bump!();
                        break;
                    }
                    '\\' => {
                        bump!();
                        if i >= chars.len() {
                            return Err(syntax_error(pos, "unterminated string"));
                        }
                        let escaped = match chars[i] {
                            'n' => '\n',
                            't' => '\t',
                            '"' => '"',
                            '\\' => '\\',
                            other => {
                                return Err(syntax_error(
                                    Pos::new(line, col),
                                    format!("unknown escape `\\{other}`"),
                                ))
                            }
                        };
                        s.push(escaped);
                        bump!();
                    }
                    other => {
                        s.push(other);
                        bump!();
                    }
                }
            }
            out.push((Tok::Str(s), pos));
            continue;
        }
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ':' => Tok::Colon,
            '.' => Tok::Dot,
            ',' => Tok::Comma,
            '+' => Tok::Plus,
            '*' => Tok::Star,
            '=' => Tok::Equals,
            '-' if chars.get(i + 1) == Some(&'>') => {
                bump!();
                Tok::Arrow
            }
            '-' => Tok::Minus,
            other => return Err(syntax_error(pos, format!("unexpected character `{other}`"))),
        };
        bump!();
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos::new(line, col)));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Spanned<T> {
    pub value: T,
    pub pos: Pos,
}

pub(crate) type Ident = Spanned<String>;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum RefAst {
    Activity(Ident),
    Fact(Ident, Ident),
}

#[derive(Debug)]
pub(crate) struct ActivityAst {
    pub id: Ident,
    pub children: Vec<ActivityAst>,
}

#[derive(Debug)]
pub(crate) struct EntityAst {
    pub id: Ident,
    pub is_a: Option<Ident>,
    pub children: Vec<EntityAst>,
}

#[derive(Debug)]
pub(crate) struct QuantifyAst {
    pub pos: Pos,
    pub node: RefAst,
    pub states: Option<Spanned<i64>>,
    pub variance: Option<Spanned<f64>>,
    pub weights: Vec<(RefAst, Spanned<f64>)>,
    pub prior: Option<Spanned<Vec<f64>>>,
}

#[derive(Debug)]
pub(crate) enum ExprAst {
    Partitioned(Vec<(Ident, Spanned<(f64, f64)>)>),
    Arithmetic {
        intercept: f64,
        slope: f64,
        variance: Spanned<f64>,
    },
}

#[derive(Debug)]
pub(crate) struct IndicatorAst {
    pub id: Ident,
    pub subject: RefAst,
    pub intervals: Spanned<Vec<f64>>,
    pub expr: ExprAst,
}

#[derive(Debug)]
pub(crate) struct GoalAst {
    pub pos: Pos,
    pub name: String,
    pub question: String,
    pub metric: Ident,
    pub activity: Ident,
}

#[derive(Debug)]
pub(crate) enum ItemAst {
    Activity(ActivityAst),
    Entity(EntityAst),
    Fact {
        entity: Ident,
        attribute: Ident,
    },
    Impact {
        entity: Ident,
        attribute: Ident,
        activity: Ident,
        sign: Sign,
    },
    Quantify(QuantifyAst),
    Indicator(IndicatorAst),
    Goal(GoalAst),
}

#[derive(Debug)]
pub(crate) struct ModelAst {
    pub name: String,
    pub items: Vec<ItemAst>,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected<T>(&self, expected: &str) -> PResult<T> {
        Err(syntax_error(
            self.pos(),
            format!("expected {expected}, found {}", self.peek().describe()),
        ))
    }

    fn expect(&mut self, tok: Tok) -> PResult<Pos> {
        if *self.peek() == tok {
            Ok(self.next().1)
        } else {
            self.unexpected(&tok.describe())
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> PResult<Pos> {
        if self.is_keyword(kw) {
            Ok(self.next().1)
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Ident(value) => {
                let pos = self.next().1;
                Ok(Spanned { value, pos })
            }
            _ => self.unexpected("identifier"),
        }
    }

    fn string(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.next();
                Ok(s)
            }
            _ => self.unexpected("string"),
        }
    }

    fn float(&mut self) -> PResult<Spanned<f64>> {
        let pos = self.pos();
        let negative = if *self.peek() == Tok::Minus {
            self.next();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Num(text) => {
                let num_pos = self.next().1;
                let value: f64 = text
                    .parse()
                    .map_err(|_| syntax_error(num_pos, format!("invalid number `{text}`")))?;
                if !value.is_finite() {
                    return Err(syntax_error(num_pos, format!("number `{text}` is out of range")));
                }
                Ok(Spanned {
                    value: if negative { -value } else { value },
                    pos,
                })
            }
            _ => self.unexpected("number"),
        }
    }

    fn int(&mut self) -> PResult<Spanned<i64>> {
        match self.peek().clone() {
            Tok::Num(text) => {
                let pos = self.next().1;
                let value = text
                    .parse()
                    .map_err(|_| syntax_error(pos, format!("expected integer, found `{text}`")))?;
                Ok(Spanned { value, pos })
            }
            _ => self.unexpected("integer"),
        }
    }

    fn reference(&mut self) -> PResult<RefAst> {
        let first = self.ident()?;
        if *self.peek() == Tok::Dot {
            self.next();
            let second = self.ident()?;
            Ok(RefAst::Fact(first, second))
        } else {
            Ok(RefAst::Activity(first))
        }
    }

    fn float_list(&mut self) -> PResult<Spanned<Vec<f64>>> {
        let pos = self.expect(Tok::LBracket)?;
        let mut values = vec![self.float()?.value];
        while *self.peek() == Tok::Comma {
            self.next();
            values.push(self.float()?.value);
        }
        self.expect(Tok::RBracket)?;
        Ok(Spanned { value: values, pos })
    }

    fn model(&mut self) -> PResult<ModelAst> {
        self.keyword("model")?;
        let name = self.string()?;
        self.expect(Tok::LBrace)?;
        let mut items = Vec::new();
        while *self.peek() != Tok::RBrace {
            items.push(self.item()?);
        }
        self.expect(Tok::RBrace)?;
        if *self.peek() != Tok::Eof {
            return self.unexpected("end of input");
        }
        Ok(ModelAst { name, items })
    }

    fn item(&mut self) -> PResult<ItemAst> {
        let keyword = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return self.unexpected("item keyword"),
        };
        match keyword.as_str() {
            "activity" => Ok(ItemAst::Activity(self.activity()?)),
            "entity" => Ok(ItemAst::Entity(self.entity()?)),
            "fact" => {
                self.next();
                let entity = self.ident()?;
                self.expect(Tok::Dot)?;
                let attribute = self.ident()?;
                Ok(ItemAst::Fact { entity, attribute })
            }
            "impact" => {
                self.next();
                let entity = self.ident()?;
                self.expect(Tok::Dot)?;
                let attribute = self.ident()?;
                self.expect(Tok::Arrow)?;
                let activity = self.ident()?;
                let sign = match self.peek() {
                    Tok::Plus => Sign::Positive,
                    Tok::Minus => Sign::Negative,
                    _ => return self.unexpected("`+` or `-`"),
                };
                self.next();
                Ok(ItemAst::Impact {
                    entity,
                    attribute,
                    activity,
                    sign,
                })
            }
            "quantify" => Ok(ItemAst::Quantify(self.quantify()?)),
            "indicator" => Ok(ItemAst::Indicator(self.indicator()?)),
            "goal" => Ok(ItemAst::Goal(self.goal()?)),
            _ => self.unexpected(
                "`activity`, `entity`, `fact`, `impact`, `quantify`, `indicator` or `goal`",
            ),
        }
    }

    fn activity(&mut self) -> PResult<ActivityAst> {
        self.keyword("activity")?;
        let id = self.ident()?;
        let mut children = Vec::new();
        if *self.peek() == Tok::LBrace {
            self.next();
            while *self.peek() != Tok::RBrace {
                if !self.is_keyword("activity") {
                    return self.unexpected("`activity` or `}`");
                }
                children.push(self.activity()?);
            }
            self.next();
        }
        Ok(ActivityAst { id, children })
    }

    fn entity(&mut self) -> PResult<EntityAst> {
        self.keyword("entity")?;
        let id = self.ident()?;
        let is_a = if *self.peek() == Tok::Colon {
            self.next();
            Some(self.ident()?)
        } else {
            None
        };
        let mut children = Vec::new();
        if *self.peek() == Tok::LBrace {
            self.next();
            while *self.peek() != Tok::RBrace {
                if !self.is_keyword("entity") {
                    return self.unexpected("`entity` or `}`");
                }
                children.push(self.entity()?);
            }
            self.next();
        }
        Ok(EntityAst { id, is_a, children })
    }

    fn quantify(&mut self) -> PResult<QuantifyAst> {
        let pos = self.keyword("quantify")?;
        let node = self.reference()?;
        self.expect(Tok::LBrace)?;
        let mut q = QuantifyAst {
            pos,
            node,
            states: None,
            variance: None,
            weights: Vec::new(),
            prior: None,
        };
        let mut seen_weights = false;
        while *self.peek() != Tok::RBrace {
            let key = self.ident()?;
            let duplicate = match key.value.as_str() {
                "states" => q.states.replace(self.int()?).is_some(),
                "variance" => q.variance.replace(self.float()?).is_some(),
                "weights" => {
                    self.expect(Tok::LBrace)?;
                    loop {
                        let parent = self.reference()?;
                        self.expect(Tok::Colon)?;
                        let w = self.float()?;
                        q.weights.push((parent, w));
                        if *self.peek() == Tok::RBrace {
                            break;
                        }
                    }
                    self.next();
                    std::mem::replace(&mut seen_weights, true)
                }
                "prior" => q.prior.replace(self.float_list()?).is_some(),
                other => {
                    return Err(syntax_error(
                        key.pos,
                        format!(
                            "unknown key `{other}` in quantify block (expected states, variance, weights or prior)"
                        ),
                    ))
                }
            };
            if duplicate {
                return Err(syntax_error(
                    key.pos,
                    format!("`{}` given twice in quantify block", key.value),
                ));
            }
        }
        self.next();
        Ok(q)
    }

    fn indicator(&mut self) -> PResult<IndicatorAst> {
        self.keyword("indicator")?;
        let id = self.ident()?;
        self.keyword("for")?;
        let subject = self.reference()?;
        self.expect(Tok::LBrace)?;
        self.keyword("intervals")?;
        let intervals = self.float_list()?;
        let expr = if self.is_keyword("partitioned") {
            self.next();
            self.expect(Tok::LBrace)?;
            let mut parts = Vec::new();
            loop {
                let label = self.ident()?;
                self.expect(Tok::Colon)?;
                let pos = self.keyword("tnormal")?;
                self.expect(Tok::LParen)?;
                let mean = self.float()?.value;
                self.expect(Tok::Comma)?;
                let variance = self.float()?.value;
                self.expect(Tok::RParen)?;
                parts.push((
                    label,
                    Spanned {
                        value: (mean, variance),
                        pos,
                    },
                ));
                if *self.peek() == Tok::RBrace {
                    break;
                }
            }
            self.next();
            ExprAst::Partitioned(parts)
        } else if self.is_keyword("arithmetic") {
            self.next();
            self.keyword("mean")?;
            self.expect(Tok::Equals)?;
            let intercept = self.float()?.value;
            let negative = match self.peek() {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => return self.unexpected("`+` or `-`"),
            };
            self.next();
            let magnitude = self.float()?.value;
            self.expect(Tok::Star)?;
            self.keyword("level")?;
            self.keyword("variance")?;
            let variance = self.float()?;
            ExprAst::Arithmetic {
                intercept,
                slope: if negative { -magnitude } else { magnitude },
                variance,
            }
        } else {
            return self.unexpected("`partitioned` or `arithmetic`");
        };
        self.expect(Tok::RBrace)?;
        Ok(IndicatorAst {
            id,
            subject,
            intervals,
            expr,
        })
    }

    fn goal(&mut self) -> PResult<GoalAst> {
        let pos = self.keyword("goal")?;
        let name = self.string()?;
        self.expect(Tok::LBrace)?;
        self.keyword("question")?;
        let question = self.string()?;
        self.keyword("metric")?;
        let metric = self.ident()?;
        self.keyword("activity")?;
        let activity = self.ident()?;
        self.expect(Tok::RBrace)?;
        Ok(GoalAst {
            pos,
            name,
            question,
            metric,
            activity,
        })
    }
}

pub(crate) fn parse(text: &str) -> Result<ModelAst, Diagnostic> {
    let toks = lex(text)?;
    Parser { toks, at: 0 }.model()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_are_one_based() {
        let toks = lex("model \"m\" {\n  activity A\n}").unwrap();
        assert_eq!(toks[0].1, Pos::new(1, 1));
        assert_eq!(toks[3].1, Pos::new(2, 3));
        assert_eq!(toks[4].1, Pos::new(2, 12));
    }

    #[test]
    fn numbers_and_arrows() {
        let toks: Vec<Tok> = lex("1 2.5 3e-2 -> - 4.")
            .unwrap()
            .into_iter()
            .map(|t| t.0)
            .collect();
        assert_eq!(
            toks,
            vec![
                Tok::Num("1".into()),
                Tok::Num("2.5".into()),
                Tok::Num("3e-2".into()),
                Tok::Arrow,
                Tok::Minus,
                Tok::Num("4".into()),
                Tok::Dot,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_are_skipped() {
        let ast = parse("# header\nmodel \"m\" { # trailing\n activity A # x\n }").unwrap();
        assert_eq!(ast.items.len(), 1);
    }

    #[test]
    fn unknown_quantify_key_is_an_error() {
        let err = parse("model \"m\" { activity A quantify A { varaince 0.1 } }").unwrap_err();
        assert_eq!(err.kind, DiagnosticKind::Syntax);
        assert!(err.message.contains("varaince"));
        assert_eq!(err.pos, Pos::new(1, 37));
    }

    #[test]
    fn arithmetic_slope_sign() {
        let ast = parse(
            "model \"m\" { activity A indicator I for A { intervals [0, 1] arithmetic mean = 40 - 25.2 * level variance 146 } }",
        )
        .unwrap();
        match &ast.items[1] {
            ItemAst::Indicator(ind) => match &ind.expr {
                ExprAst::Arithmetic {
                    intercept, slope, ..
                } => {
                    assert_eq!(*intercept, 40.0);
                    assert_eq!(*slope, -25.2);
                }
                other => panic!("{other:?}"),
            },
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_brace_reports_position() {
        let err = parse("model \"m\" {\n activity A {\n activity B\n").unwrap_err();
        assert_eq!(err.pos.line, 4);
    }
}
