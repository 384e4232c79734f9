use super::Formula;

const IFF: u8 = 1;
const IMPLIES: u8 = 2;
const OR: u8 = 3;
const AND: u8 = 4;
const UNARY: u8 = 5;

fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Iff(..) => IFF,
        Formula::Implies(..) => IMPLIES,
        Formula::Or(..) => OR,
        Formula::And(..) => AND,
        _ => UNARY,
    }
}

/// Canonical text form: minimal parentheses under the grammar's precedence,
/// `&`, `|` and `<->` left-associative, `->` right-associative.
pub fn print_formula(f: &Formula) -> String {
    let mut out = String::new();
    write(f, 0, &mut out);
    out
}

fn write(f: &Formula, min: u8, out: &mut String) {
    let paren = precedence(f) < min;
    if paren {
        out.push('(');
    }
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Known => out.push_str("known"),
        Formula::Prop(p) => out.push_str(p),
        Formula::Nom(i) => {
            out.push('\'');
            out.push_str(i);
        }
        Formula::Not(a) => {
            out.push('~');
            write(a, UNARY, out);
        }
        Formula::Diamond(r, a) => prefixed(out, &format!("<{r}>"), a),
        Formula::Box(r, a) => prefixed(out, &format!("[{r}]"), a),
        Formula::DDiamond(r, a) => prefixed(out, &format!("<<{r}>>"), a),
        Formula::DBox(r, a) => prefixed(out, &format!("[[{r}]]"), a),
        Formula::Remember(a) => prefixed(out, "rem ", a),
        Formula::Forget(a) => prefixed(out, "forg ", a),
        Formula::Erase(a) => prefixed(out, "erase ", a),
        Formula::At(i, a) => prefixed(out, &format!("@{i} "), a),
        Formula::And(a, b) => binary(out, a, " & ", b, AND, AND + 1),
        Formula::Or(a, b) => binary(out, a, " | ", b, OR, OR + 1),
        Formula::Implies(a, b) => binary(out, a, " -> ", b, IMPLIES + 1, IMPLIES),
        Formula::Iff(a, b) => binary(out, a, " <-> ", b, IFF, IFF + 1),
    }
    if paren {
        out.push(')');
    }
}

fn prefixed(out: &mut String, head: &str, body: &Formula) {
    out.push_str(head);
    write(body, UNARY, out);
}

fn binary(out: &mut String, a: &Formula, op: &str, b: &Formula, left_min: u8, right_min: u8) {
    write(a, left_min, out);
    out.push_str(op);
    write(b, right_min, out);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atoms_and_prefixes() {
        assert_eq!(print_formula(&Formula::True), "true");
        assert_eq!(print_formula(&Formula::diamond("r1", Formula::prop("p"))), "<r1>p");
        assert_eq!(print_formula(&Formula::at("i", Formula::nom("j"))), "@i 'j");
        assert_eq!(
            print_formula(&Formula::remember(Formula::diamond("r", Formula::not(Formula::Known)))),
            "rem <r>~known"
        );
    }

    #[test]
    fn parenthesization() {
        let p = || Formula::prop("p");
        let q = || Formula::prop("q");
        assert_eq!(print_formula(&Formula::diamond("r", Formula::and(p(), q()))), "<r>(p & q)");
        assert_eq!(print_formula(&Formula::and(p(), Formula::and(q(), p()))), "p & (q & p)");
        assert_eq!(print_formula(&Formula::and(Formula::and(p(), q()), p())), "p & q & p");
        assert_eq!(print_formula(&Formula::implies(Formula::implies(p(), q()), p())), "(p -> q) -> p");
        assert_eq!(print_formula(&Formula::implies(p(), Formula::implies(q(), p()))), "p -> q -> p");
        assert_eq!(print_formula(&Formula::not(Formula::or(p(), q()))), "~(p | q)");
    }
}
