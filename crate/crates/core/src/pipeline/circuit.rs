use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateOp {
    Input,
    And,
    Or,
    Not,
    Xor,
}

impl GateOp {
    fn arity(self) -> usize {
        match self {
            GateOp::Input => 0,
            GateOp::Not => 1,
            _ => 2,
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_uppercase().as_str() {
            "INPUT" => GateOp::Input,
            "AND" => GateOp::And,
            "OR" => GateOp::Or,
            "NOT" => GateOp::Not,
            "XOR" => GateOp::Xor,
            _ => return None,
        })
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateOp::Input => "INPUT",
            GateOp::And => "AND",
            GateOp::Or => "OR",
            GateOp::Not => "NOT",
            GateOp::Xor => "XOR",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub op: GateOp,
    pub inputs: Vec<usize>,
}

/// Boolean circuit in topological order. Nodes `0..n_inputs` are the
/// inputs; every gate reads only earlier nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    n_inputs: usize,
    gates: Vec<Gate>,
    output: usize,
    names: Vec<String>,
}

impl Circuit {
    /// A circuit with `n` inputs named `x1..xn` and no gates yet.
    pub fn with_inputs(n: usize) -> Self {
        Circuit {
            n_inputs: n,
            gates: (0..n)
                .map(|_| Gate {
                    op: GateOp::Input,
                    inputs: vec![],
                })
                .collect(),
            output: n.saturating_sub(1),
            names: (1..=n).map(|i| format!("x{i}")).collect(),
        }
    }

    /// Appends a gate over existing nodes and makes it the output.
    pub fn push(&mut self, op: GateOp, inputs: &[usize]) -> Result<usize> {
        let id = self.gates.len();
        if op == GateOp::Input {
            return Err(Error::InvalidCircuit("inputs must precede gates".into()));
        }
        if inputs.len() != op.arity() {
            return Err(Error::InvalidCircuit(format!("{op} takes {} inputs", op.arity())));
        }
        if let Some(&bad) = inputs.iter().find(|&&i| i >= id) {
            return Err(Error::InvalidCircuit(format!("gate {id} reads undefined node {bad}")));
        }
        self.gates.push(Gate {
            op,
            inputs: inputs.to_vec(),
        });
        self.names.push(format!("g{}", id + 1));
        self.output = id;
        Ok(id)
    }

    pub fn and(&mut self, a: usize, b: usize) -> usize {
        self.push(GateOp::And, &[a, b]).expect("valid operands")
    }

    pub fn or(&mut self, a: usize, b: usize) -> usize {
        self.push(GateOp::Or, &[a, b]).expect("valid operands")
    }

    pub fn xor(&mut self, a: usize, b: usize) -> usize {
        self.push(GateOp::Xor, &[a, b]).expect("valid operands")
    }

    pub fn not(&mut self, a: usize) -> usize {
        self.push(GateOp::Not, &[a]).expect("valid operand")
    }

    /// Balanced AND over `nodes`; `None` if empty.
    pub fn and_all(&mut self, nodes: &[usize]) -> Option<usize> {
        let mut layer = nodes.to_vec();
        while layer.len() > 1 {
            layer = layer
                .chunks(2)
                .map(|pair| match *pair {
                    [a, b] => self.and(a, b),
                    [a] => a,
                    _ => unreachable!(),
                })
                .collect();
        }
        if let Some(&root) = layer.first() {
            self.output = root;
        }
        layer.first().copied()
    }

    pub fn set_output(&mut self, id: usize) -> Result<()> {
        if id >= self.gates.len() {
            return Err(Error::InvalidCircuit(format!("output {id} is undefined")));
        }
        self.output = id;
        Ok(())
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    /// All nodes, inputs first.
    pub fn nodes(&self) -> &[Gate] {
        &self.gates
    }

    pub fn output(&self) -> usize {
        self.output
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    /// Value of every node.
    pub fn evaluate_all(&self, inputs: &[bool]) -> Result<Vec<bool>> {
        if inputs.len() != self.n_inputs {
            return Err(Error::LengthMismatch {
                expected: self.n_inputs,
                got: inputs.len(),
            });
        }
        let mut val = Vec::with_capacity(self.gates.len());
        for (id, g) in self.gates.iter().enumerate() {
            let x = |k: usize| val[g.inputs[k]];
            let v = match g.op {
                GateOp::Input => inputs[id],
                GateOp::And => x(0) && x(1),
                GateOp::Or => x(0) || x(1),
                GateOp::Not => !x(0),
                GateOp::Xor => x(0) ^ x(1),
            };
            val.push(v);
        }
        Ok(val)
    }

    pub fn evaluate(&self, inputs: &[bool]) -> Result<bool> {
        Ok(self.evaluate_all(inputs)?[self.output])
    }

    /// Parses the gate DSL: one `name = OP arg...` per line, `#` comments,
    /// and an optional `output name` line (default: the last gate).
    /// Definitions may appear in any order; cycles are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut defs: Vec<(String, GateOp, Vec<String>, usize)> = Vec::new();
        let mut output: Option<String> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |msg: String| Error::parse(format!("line {}: {msg}", lineno + 1));
            if let Some(rest) = line.strip_prefix("output ") {
                output = Some(rest.trim().to_string());
                continue;
            }
            let (lhs, rhs) = line
                .split_once('=')
                .ok_or_else(|| at(format!("expected `name = OP args`, got `{line}`")))?;
            let name = lhs.trim().to_string();
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(at(format!("bad gate name `{}`", lhs.trim())));
            }
            let mut parts = rhs.split_whitespace();
            let op_text = parts.next().ok_or_else(|| at("missing operator".into()))?;
            let op = GateOp::parse(op_text).ok_or_else(|| at(format!("unknown operator `{op_text}`")))?;
            let args: Vec<String> = parts.map(str::to_string).collect();
            if args.len() != op.arity() {
                return Err(at(format!("{op} takes {} arguments, got {}", op.arity(), args.len())));
            }
            if defs.iter().any(|d| d.0 == name) {
                return Err(at(format!("`{name}` defined twice")));
            }
            defs.push((name, op, args, lineno + 1));
        }
        if defs.is_empty() {
            return Err(Error::parse("circuit has no gates"));
        }
        let index: HashMap<&str, usize> = defs.iter().enumerate().map(|(i, d)| (d.0.as_str(), i)).collect();
        for (name, _, args, line) in &defs {
            if let Some(a) = args.iter().find(|a| !index.contains_key(a.as_str())) {
                return Err(Error::parse(format!("line {line}: `{name}` reads undefined `{a}`")));
            }
        }

        // Inputs first in order of definition, then gates topologically.
        let mut order: Vec<usize> = (0..defs.len()).filter(|&i| defs[i].1 == GateOp::Input).collect();
        let n_inputs = order.len();
        let mut state = vec![0u8; defs.len()]; // 0 new, 1 open, 2 done
        for &i in &order {
            state[i] = 2;
        }
        fn visit(
            i: usize,
            defs: &[(String, GateOp, Vec<String>, usize)],
            index: &HashMap<&str, usize>,
            state: &mut [u8],
            order: &mut Vec<usize>,
        ) -> Result<()> {
            match state[i] {
                2 => return Ok(()),
                1 => return Err(Error::InvalidCircuit(format!("cycle through `{}`", defs[i].0))),
                _ => {}
            }
            state[i] = 1;
            for a in &defs[i].2 {
                visit(index[a.as_str()], defs, index, state, order)?;
            }
            state[i] = 2;
            order.push(i);
            Ok(())
        }
        for i in 0..defs.len() {
            visit(i, &defs, &index, &mut state, &mut order)?;
        }

        let mut position = vec![0; defs.len()];
        for (pos, &i) in order.iter().enumerate() {
            position[i] = pos;
        }
        let gates = order
            .iter()
            .map(|&i| Gate {
                op: defs[i].1,
                inputs: defs[i].2.iter().map(|a| position[index[a.as_str()]]).collect(),
            })
            .collect();
        let names = order.iter().map(|&i| defs[i].0.clone()).collect();
        let output = match output {
            Some(name) => {
                let i = index
                    .get(name.as_str())
                    .ok_or_else(|| Error::parse(format!("output `{name}` is undefined")))?;
                position[*i]
            }
            None => position[defs.len() - 1],
        };
        Ok(Circuit {
            n_inputs,
            gates,
            output,
            names,
        })
    }

    /// Writes the DSL form; parsing it back gives the same circuit.
    pub fn to_dsl(&self) -> String {
        let mut out = String::new();
        for (id, g) in self.gates.iter().enumerate() {
            let args: Vec<&str> = g.inputs.iter().map(|&i| self.names[i].as_str()).collect();
            let sep = if args.is_empty() { "" } else { " " };
            out.push_str(&format!("{} = {}{sep}{}\n", self.names[id], g.op, args.join(" ")));
        }
        out.push_str(&format!("output {}\n", self.names[self.output]));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_evaluate() {
        let c = Circuit::parse("x1 = INPUT\nx2 = INPUT\ng3 = AND x1 x2\ng4 = NOT g3 # nand\n").unwrap();
        assert_eq!(c.n_inputs(), 2);
        assert_eq!(c.output(), 3);
        assert!(c.evaluate(&[true, false]).unwrap());
        assert!(!c.evaluate(&[true, true]).unwrap());
    }

    #[test]
    fn out_of_order_definitions() {
        let c = Circuit::parse("g = XOR a b\na = INPUT\nb = INPUT\noutput g").unwrap();
        assert_eq!(c.name(c.output()), "g");
        assert!(c.evaluate(&[true, false]).unwrap());
        assert_eq!(Circuit::parse(&c.to_dsl()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_circuits() {
        for bad in [
            "",
            "a = INPUT\ng = AND a",
            "a = INPUT\ng = FOO a a",
            "a = INPUT\ng = AND a h",
            "a = INPUT\ng = AND a h\nh = AND g a",
            "a = INPUT\na = INPUT",
            "a = INPUT\noutput z",
        ] {
            assert!(Circuit::parse(bad).is_err(), "{bad:?}");
        }
        let cyc = Circuit::parse("a = INPUT\ng = AND a h\nh = AND g a").unwrap_err();
        assert!(matches!(cyc, Error::InvalidCircuit(_)));
    }

    #[test]
    fn builder() {
        let mut c = Circuit::with_inputs(3);
        let a = c.and(0, 1);
        let o = c.or(a, 2);
        let root = c.and_all(&[o, 2]).unwrap();
        assert_eq!(c.output(), root);
        assert!(c.evaluate(&[false, false, true]).unwrap());
        assert!(c.push(GateOp::Not, &[99]).is_err());
    }
}
