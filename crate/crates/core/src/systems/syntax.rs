//! Text forms of systems, regions and points.
//!
//! ```text
//! system := cyclic(k) | rot(a, ...) | skew2(a) | skews(a) | chacon(L)
//!         | product(system, system) | power(system, k) | diagonal(system, d)
//! region := full | arc(a, b) | box(arc(a, b) | full, ...) | res{r, ...}
//!         | cyl{w, ...} | pair(region, region) | tuple(region, ...)
//!         | union(region, ...)
//! point  := pt(a, ...) | res(r) | word(i) | pair(point, point) | tuple(point, ...)
//! ```

use std::str::FromStr;

use super::{CircleArc, Point, Region, Scalar, SystemError, SystemSpec};

#[derive(Debug, Clone, PartialEq)]
enum Expr {
    Atom(String),
    Call(String, Vec<Expr>),
    Set(String, Vec<Expr>),
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

fn is_delim(c: char) -> bool {
    c.is_whitespace() || "(){},".contains(c)
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn expr(&mut self) -> Result<Expr, String> {
        self.skip_ws();
        let start = self.pos;
        let word_len = self.src[start..].find(is_delim).unwrap_or(self.src.len() - start);
        if word_len == 0 {
            return Err(match self.peek() {
                Some(c) => format!("unexpected '{c}' at offset {}", self.pos),
                None => "unexpected end of input".into(),
            });
        }
        let word = self.src[start..start + word_len].to_string();
        self.pos += word_len;
        match self.src[self.pos..].chars().next() {
            Some('(') => {
                self.pos += 1;
                Ok(Expr::Call(word, self.list(')')?))
            }
            Some('{') => {
                self.pos += 1;
                Ok(Expr::Set(word, self.list('}')?))
            }
            _ => Ok(Expr::Atom(word)),
        }
    }

    fn list(&mut self, close: char) -> Result<Vec<Expr>, String> {
        let mut items = Vec::new();
        if self.peek() == Some(close) {
            self.pos += 1;
            return Ok(items);
        }
        loop {
            items.push(self.expr()?);
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(c) if c == close => {
                    self.pos += 1;
                    return Ok(items);
                }
                Some(c) => return Err(format!("expected ',' or '{close}' at offset {}, found '{c}'", self.pos)),
                None => return Err(format!("missing '{close}'")),
            }
        }
    }
}

fn parse_expr(s: &str) -> Result<Expr, String> {
    let mut p = Parser { src: s, pos: 0 };
    let e = p.expr()?;
    if let Some(c) = p.peek() {
        return Err(format!("trailing input at offset {}: '{c}'", p.pos));
    }
    Ok(e)
}

fn atom(e: &Expr) -> Result<&str, String> {
    match e {
        Expr::Atom(s) => Ok(s),
        _ => Err("expected a plain value".into()),
    }
}

fn scalar(e: &Expr) -> Result<Scalar, String> {
    atom(e)?.parse::<Scalar>().map_err(|e| e.to_string())
}

fn int<T: FromStr>(e: &Expr) -> Result<T, String> {
    let s = atom(e)?;
    s.parse().map_err(|_| format!("bad integer {s:?}"))
}

fn arity(name: &str, args: &[Expr], n: usize) -> Result<(), String> {
    if args.len() != n {
        return Err(format!("{name} takes {n} argument(s), got {}", args.len()));
    }
    Ok(())
}

fn system(e: &Expr) -> Result<SystemSpec, String> {
    let Expr::Call(name, args) = e else {
        return Err("expected a system constructor".into());
    };
    Ok(match name.as_str() {
        "cyclic" => {
            arity(name, args, 1)?;
            let k: u64 = int(&args[0])?;
            if k == 0 {
                return Err("cyclic needs k >= 1".into());
            }
            SystemSpec::Cyclic(k)
        }
        "rot" => {
            if args.is_empty() {
                return Err("rot needs at least one coordinate".into());
            }
            SystemSpec::TorusRot(args.iter().map(scalar).collect::<Result<_, _>>()?)
        }
        "skew2" => {
            arity(name, args, 1)?;
            SystemSpec::Skew2(scalar(&args[0])?)
        }
        "skews" => {
            arity(name, args, 1)?;
            SystemSpec::SkewS(scalar(&args[0])?)
        }
        "chacon" => {
            arity(name, args, 1)?;
            SystemSpec::chacon(int(&args[0])?).map_err(|e| e.to_string())?
        }
        "product" => {
            arity(name, args, 2)?;
            SystemSpec::product(system(&args[0])?, system(&args[1])?)
        }
        "power" => {
            arity(name, args, 2)?;
            SystemSpec::power(system(&args[0])?, int(&args[1])?)
        }
        "diagonal" => {
            arity(name, args, 2)?;
            SystemSpec::diagonal(system(&args[0])?, int(&args[1])?)
        }
        other => return Err(format!("unknown system {other:?}")),
    })
}

fn arc(e: &Expr) -> Result<CircleArc, String> {
    match e {
        Expr::Atom(a) if a == "full" => Ok(CircleArc::Full),
        Expr::Call(name, args) if name == "arc" => {
            arity(name, args, 2)?;
            CircleArc::open(scalar(&args[0])?, scalar(&args[1])?).map_err(|e| e.to_string())
        }
        _ => Err("expected arc(a, b) or full".into()),
    }
}

fn region(e: &Expr) -> Result<Region, String> {
    Ok(match e {
        Expr::Atom(a) if a == "full" => Region::Full,
        Expr::Atom(a) => return Err(format!("unknown region {a:?}")),
        Expr::Call(name, args) => match name.as_str() {
            "arc" => Region::Box(vec![arc(e)?]),
            "box" => {
                if args.is_empty() {
                    return Err("box needs at least one arc".into());
                }
                Region::Box(args.iter().map(arc).collect::<Result<_, _>>()?)
            }
            "pair" => {
                arity(name, args, 2)?;
                Region::Pair(Box::new(region(&args[0])?), Box::new(region(&args[1])?))
            }
            "tuple" => Region::Tuple(args.iter().map(region).collect::<Result<_, _>>()?),
            "union" => Region::Union(args.iter().map(region).collect::<Result<_, _>>()?),
            other => return Err(format!("unknown region {other:?}")),
        },
        Expr::Set(name, items) => match name.as_str() {
            "res" => Region::Residues(items.iter().map(int).collect::<Result<_, _>>()?),
            "cyl" => Region::Cylinders(
                items
                    .iter()
                    .map(|w| {
                        let s = atom(w)?;
                        s.chars()
                            .map(|c| match c {
                                '0' => Ok(0u8),
                                '1' => Ok(1u8),
                                _ => Err(format!("cylinder {s:?} is not a 0/1 word")),
                            })
                            .collect::<Result<Vec<u8>, String>>()
                    })
                    .collect::<Result<_, _>>()?,
            ),
            other => return Err(format!("unknown set {other:?}")),
        },
    })
}

fn point(e: &Expr) -> Result<Point, String> {
    let Expr::Call(name, args) = e else {
        return Err("expected a point constructor".into());
    };
    Ok(match name.as_str() {
        "pt" => Point::Torus(args.iter().map(scalar).collect::<Result<_, _>>()?),
        "res" => {
            arity(name, args, 1)?;
            Point::Residue(int(&args[0])?)
        }
        "word" => {
            arity(name, args, 1)?;
            Point::WordIndex(int(&args[0])?)
        }
        "pair" => {
            arity(name, args, 2)?;
            Point::pair(point(&args[0])?, point(&args[1])?)
        }
        "tuple" => Point::Tuple(args.iter().map(point).collect::<Result<_, _>>()?),
        other => return Err(format!("unknown point {other:?}")),
    })
}

fn parse_with<T>(what: &'static str, s: &str, f: fn(&Expr) -> Result<T, String>) -> Result<T, SystemError> {
    parse_expr(s)
        .and_then(|e| f(&e))
        .map_err(|reason| SystemError::Parse { what, input: s.to_string(), reason })
}

impl FromStr for SystemSpec {
    type Err = SystemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_with("system", s, system)
    }
}

impl FromStr for Region {
    type Err = SystemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_with("region", s, region)
    }
}

impl FromStr for Point {
    type Err = SystemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_with("point", s, point)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_systems_round_trip() {
        for s in [
            "cyclic(4)",
            "rot(1/5, 3/7)",
            "skew2(1/5)",
            "skews(fixed:0x6a09e667f3bcc908b2fb1366ea957d3e)",
            "chacon(3)",
            "product(rot(1/2), cyclic(3))",
            "power(skew2(1/3), -2)",
            "diagonal(rot(1/4), 3)",
        ] {
            let sys: SystemSpec = s.parse().unwrap();
            assert_eq!(sys.to_string(), s);
        }
    }

    #[test]
    fn regions_and_points_round_trip() {
        for s in [
            "full",
            "box(arc(0, 3/10), full)",
            "res{0, 2}",
            "res{}",
            "cyl{0010, 1}",
            "pair(box(arc(1/2, 1/4)), res{1})",
            "union(box(arc(0, 1/2)), box(arc(3/4, 7/8)))",
        ] {
            let r: Region = s.parse().unwrap();
            assert_eq!(r.to_string(), s);
        }
        for s in ["pt(0, 1/3)", "res(2)", "word(17)", "tuple(pt(0), pt(1/2))"] {
            let p: Point = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert_eq!("arc(0, 1/2)".parse::<Region>().unwrap().to_string(), "box(arc(0, 1/2))");
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "rot(", "rot()", "cyclic(0)", "foo(1)", "skew2(1/5) x", "chacon(17)", "product(cyclic(2))"] {
            assert!(s.parse::<SystemSpec>().is_err(), "{s}");
        }
        assert!("arc(1/3, 1/3)".parse::<Region>().is_err());
        assert!("cyl{012}".parse::<Region>().is_err());
    }
}
