use super::{Node, PotentialExpr};

// Binding strength of the printed form; an operand printed below the
// strength its slot requires gets parenthesised.
const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

/// Canonical text form; `parse(print(e))` reproduces `e` structurally.
pub fn print(expr: &PotentialExpr) -> String {
    let mut out = String::new();
    write_node(expr.root(), &mut out);
    out
}

fn strength(node: &Node) -> u8 {
    match node {
        Node::Add(..) | Node::Sub(..) => SUM,
        Node::Mul(..) => PRODUCT,
        Node::Neg(_) => UNARY,
        Node::Pow(..) => POWER,
        // a negative literal is an atom: the parser folds the sign into it
        _ => ATOM,
    }
}

fn write_operand(node: &Node, min: u8, out: &mut String) {
    if strength(node) < min {
        out.push('(');
        write_node(node, out);
        out.push(')');
    } else {
        write_node(node, out);
    }
}

fn write_number(c: f64, out: &mut String) {
    if c.is_sign_negative() {
        out.push('-');
        out.push_str(&(-c).to_string());
    } else {
        out.push_str(&c.to_string());
    }
}

fn starts_with_literal(node: &Node) -> bool {
    match node {
        Node::Const(_) => true,
        Node::Pow(base, _) => starts_with_literal(base),
        _ => false,
    }
}

fn write_node(node: &Node, out: &mut String) {
    match node {
        Node::Const(c) => write_number(*c, out),
        Node::Var(i) => {
            out.push('z');
            out.push_str(&(i + 1).to_string());
        }
        Node::ConjVar(i) => {
            out.push_str("zbar");
            out.push_str(&(i + 1).to_string());
        }
        Node::Add(a, b) | Node::Sub(a, b) => {
            write_operand(a, SUM, out);
            out.push_str(if matches!(node, Node::Add(..)) { " + " } else { " - " });
            write_operand(b, PRODUCT, out);
        }
        Node::Mul(a, b) => {
            write_operand(a, PRODUCT, out);
            out.push('*');
            write_operand(b, UNARY, out);
        }
        Node::Neg(a) => {
            out.push('-');
            // "-2" would read back as a literal
            if starts_with_literal(a) {
                out.push('(');
                write_node(a, out);
                out.push(')');
            } else {
                write_operand(a, UNARY, out);
            }
        }
        Node::Pow(a, k) => {
            write_operand(a, ATOM, out);
            out.push('^');
            out.push_str(&k.to_string());
        }
        Node::Exp(a) | Node::Log(a) | Node::Re(a) | Node::Im(a) => {
            out.push_str(match node {
                Node::Exp(_) => "exp(",
                Node::Log(_) => "log(",
                Node::Re(_) => "re(",
                _ => "im(",
            });
            write_node(a, out);
            out.push(')');
        }
    }
}
