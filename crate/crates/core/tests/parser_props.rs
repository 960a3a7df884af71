use holoflow_core::{parse_expression, Complex64, Params};
use proptest::prelude::*;

/// Direct-evaluating recursive descent over the same grammar, sharing no
/// code with the crate's parser.
struct Oracle<'a> {
    src: &'a [u8],
    pos: usize,
    z: &'a [Complex64],
    params: &'a Params,
}

impl Oracle<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos] == b' ' {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Complex64 {
        let mut acc = self.product();
        loop {
            if self.eat(b'+') {
                acc += self.product();
            } else if self.eat(b'-') {
                acc -= self.product();
            } else {
                return acc;
            }
        }
    }

    fn product(&mut self) -> Complex64 {
        let mut acc = self.signed();
        loop {
            if self.eat(b'*') {
                acc *= self.signed();
            } else if self.eat(b'/') {
                acc /= self.signed();
            } else {
                return acc;
            }
        }
    }

    fn signed(&mut self) -> Complex64 {
        if self.eat(b'-') {
            return -self.signed();
        }
        let base = self.primary();
        if self.eat(b'^') {
            let e = self.signed();
            return raise(base, e);
        }
        base
    }

    fn primary(&mut self) -> Complex64 {
        if self.eat(b'(') {
            let v = self.sum();
            assert!(self.eat(b')'));
            return v;
        }
        self.skip_ws();
        let start = self.pos;
        let c = self.src[start];
        if c.is_ascii_digit() || c == b'.' {
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
            {
                self.pos += 1;
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            return Complex64::new(text.parse().unwrap(), 0.0);
        }
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if self.eat(b'(') {
            let a = self.sum();
            assert!(self.eat(b')'));
            return match name {
                "exp" => a.exp(),
                "log" => a.ln(),
                "sin" => a.sin(),
                "cos" => a.cos(),
                "sinh" => a.sinh(),
                "cosh" => a.cosh(),
                "sqrt" => a.sqrt(),
                other => panic!("oracle: unknown function {other}"),
            };
        }
        if let Some(k) = name.strip_prefix('x') {
            return self.z[k.parse::<usize>().unwrap() - 1];
        }
        Complex64::new(self.params[name], 0.0)
    }
}

/// Integer exponents by plain multiplication, others on the principal branch.
fn raise(b: Complex64, e: Complex64) -> Complex64 {
    if e.im == 0.0 && e.re.fract() == 0.0 && e.re.abs() <= 8.0 {
        let mut acc = Complex64::new(1.0, 0.0);
        for _ in 0..e.re.abs() as i32 {
            acc *= b;
        }
        if e.re < 0.0 {
            Complex64::new(1.0, 0.0) / acc
        } else {
            acc
        }
    } else {
        (e * b.ln()).exp()
    }
}

fn oracle_eval(src: &str, z: &[Complex64], params: &Params) -> Complex64 {
    let mut o = Oracle {
        src: src.as_bytes(),
        pos: 0,
        z,
        params,
    };
    let v = o.sum();
    assert_eq!(o.peek(), None, "oracle left input in {src}");
    v
}

fn params() -> Params {
    Params::from([("a".to_string(), 0.7), ("b".to_string(), -1.3)])
}

fn leaf() -> impl Strategy<Value = String> {
    prop_oneof![
        prop_oneof![Just("2"), Just("0.5"), Just("3.25"), Just("1.5"), Just("7")]
            .prop_map(String::from),
        (1usize..=3).prop_map(|k| format!("x{k}")),
        prop_oneof![Just("a"), Just("b")].prop_map(String::from),
    ]
}

/// Random well-formed sources; `branch_free` leaves out log, sqrt and
/// fractional powers except on arguments that stay positive on reals.
fn source(branch_free: bool) -> impl Strategy<Value = String> {
    leaf().prop_recursive(4, 24, 2, move |inner| {
        let ops = prop_oneof![Just("+"), Just("-"), Just("*"), Just("/")];
        let funcs = prop_oneof![
            Just("exp"),
            Just("sin"),
            Just("cos"),
            Just("sinh"),
            Just("cosh")
        ];
        let exps = prop_oneof![Just("2"), Just("3"), Just("-1")];
        prop_oneof![
            (inner.clone(), ops.clone(), inner.clone())
                .prop_map(|(a, op, b)| format!("{a} {op} {b}")),
            (inner.clone(), ops, inner.clone()).prop_map(|(a, op, b)| format!("({a}) {op} ({b})")),
            (inner.clone(), exps.clone()).prop_map(|(a, e)| format!("{a}^{e}")),
            (inner.clone(), exps).prop_map(|(a, e)| format!("({a}) ^ {e}")),
            inner.clone().prop_map(|a| format!("-{a}")),
            (funcs, inner.clone()).prop_map(|(f, a)| format!("{f}({a})")),
            inner.clone().prop_map(move |a| if branch_free {
                format!("sqrt(1 + ({a})^2)")
            } else {
                format!("sqrt({a})")
            }),
            inner.prop_map(move |a| if branch_free {
                format!("log(2 + ({a})^2) ^ 0.5")
            } else {
                format!("log({a})")
            }),
        ]
    })
}

fn complex_point() -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(
        (-1.5f64..1.5, -1.5f64..1.5).prop_map(|(r, i)| Complex64::new(r, i)),
        3,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matches_independent_evaluator(src in source(false), z in complex_point()) {
        let p = params();
        let ast = parse_expression(&src, 3).unwrap();
        let expect = oracle_eval(&src, &z, &p);
        let got = ast.eval(&z, &p);
        prop_assume!(expect.re.is_finite() && expect.im.is_finite());
        let got = got.unwrap();
        let scale = expect.norm().max(1.0);
        prop_assert!((got - expect).norm() <= 1e-12 * scale, "{src}: {got} vs {expect}");
    }

    #[test]
    fn round_trip_through_printing(src in source(false)) {
        let ast = parse_expression(&src, 3).unwrap();
        let printed = ast.to_string();
        let again = parse_expression(&printed, 3).unwrap();
        prop_assert_eq!(&again, &ast);
        prop_assert_eq!(again.to_string(), printed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn real_inputs_give_real_values(src in source(true), x in prop::collection::vec(-1.5f64..1.5, 3)) {
        let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let ast = parse_expression(&src, 3).unwrap();
        if let Ok(v) = ast.eval(&z, &params()) {
            prop_assume!(v.re.is_finite());
            prop_assert_eq!(v.im, 0.0, "{}", src);
        }
    }
}
