//! The tiny p-expression grammar: a constant `c`, `n^-a`, `1/log n`,
//! `sqrt(log n / n)`, optionally scaled as `c*<base>`.

#[derive(Clone, Debug, PartialEq)]
pub enum PExpr {
    Constant(f64),
    Power(f64),
    InvLog,
    SqrtLogOverN,
    Scaled(f64, Box<PExpr>),
}

impl PExpr {
    pub fn parse(text: &str) -> Result<PExpr, String> {
        let t = text.trim();
        if let Some((head, tail)) = t.split_once('*') {
            let c: f64 = head
                .trim()
                .parse()
                .map_err(|_| format!("bad scalar in p-expr `{t}`"))?;
            let inner = PExpr::parse(tail)?;
            return Ok(PExpr::Scaled(c, Box::new(inner)));
        }
        let squashed: String = t.chars().filter(|c| !c.is_whitespace()).collect();
        if squashed == "1/logn" {
            return Ok(PExpr::InvLog);
        }
        if squashed == "sqrt(logn/n)" {
            return Ok(PExpr::SqrtLogOverN);
        }
        if let Some(rest) = squashed.strip_prefix("n^-") {
            let a: f64 = rest
                .parse()
                .map_err(|_| format!("bad exponent in p-expr `{t}`"))?;
            return Ok(PExpr::Power(a));
        }
        if let Ok(c) = squashed.parse::<f64>() {
            return Ok(PExpr::Constant(c));
        }
        Err(format!("unrecognized p-expr `{t}`"))
    }

    pub fn eval(&self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            PExpr::Constant(c) => *c,
            PExpr::Power(a) => nf.powf(-a),
            PExpr::InvLog => 1.0 / nf.ln(),
            PExpr::SqrtLogOverN => (nf.ln() / nf).sqrt(),
            PExpr::Scaled(c, inner) => c * inner.eval(n),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            PExpr::Constant(c) => format!("{c}"),
            PExpr::Power(a) => format!("n^-{a}"),
            PExpr::InvLog => "1/log n".into(),
            PExpr::SqrtLogOverN => "sqrt(log n / n)".into(),
            PExpr::Scaled(c, inner) => format!("{c}*{}", inner.describe()),
        }
    }
}
