//! Runtime values. Lists are persistent cons cells: `cons`, `head`, `tail`
//! share structure and never copy, so a list received by one function can be
//! extended by two callers without either seeing the other's extension.
//! Objects are references into the session's object store; the `frozen` bit
//! travels with the reference and marks values reached through `constref`.

use std::rc::Rc;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ObjRef {
    pub id: usize,
    pub frozen: bool,
}

#[derive(Clone, Debug, Default)]
pub struct PList(Option<Rc<PNode>>);

#[derive(Debug)]
struct PNode {
    head: Value,
    tail: PList,
}

impl PList {
    pub fn nil() -> PList {
        PList(None)
    }

    pub fn cons(head: Value, tail: &PList) -> PList {
        PList(Some(Rc::new(PNode { head, tail: tail.clone() })))
    }

    pub fn is_nil(&self) -> bool {
        self.0.is_none()
    }

    pub fn head(&self) -> Option<&Value> {
        self.0.as_deref().map(|n| &n.head)
    }

    pub fn tail(&self) -> Option<PList> {
        self.0.as_deref().map(|n| n.tail.clone())
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        self.is_nil()
    }

    pub fn iter(&self) -> PListIter<'_> {
        PListIter { cur: self.0.as_deref() }
    }

    /// Build a list from front to back.
    pub fn from_values<I: IntoIterator<Item = Value>>(values: I) -> PList
    where
        I::IntoIter: DoubleEndedIterator,
    {
        let mut out = PList::nil();
        for v in values.into_iter().rev() {
            out = PList::cons(v, &out);
        }
        out
    }
}

pub struct PListIter<'a> {
    cur: Option<&'a PNode>,
}

impl<'a> Iterator for PListIter<'a> {
    type Item = &'a Value;

    fn next(&mut self) -> Option<&'a Value> {
        let node = self.cur?;
        self.cur = node.tail.0.as_deref();
        Some(&node.head)
    }
}

#[derive(Clone, Debug)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Unit,
    List(PList),
    Obj(ObjRef),
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Bool(_) => "bool",
            Value::Unit => "unit",
            Value::List(_) => "list",
            Value::Obj(_) => "object",
        }
    }
}

/// Structural equality for `==`/`!=`: ints, bools and unit by value, lists
/// element-wise, objects by identity. Comparing different kinds of value is
/// a runtime type error, reported by the caller via the returned names.
pub fn value_eq(a: &Value, b: &Value) -> Result<bool, (&'static str, &'static str)> {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => Ok(x == y),
        (Value::Bool(x), Value::Bool(y)) => Ok(x == y),
        (Value::Unit, Value::Unit) => Ok(true),
        (Value::Obj(x), Value::Obj(y)) => Ok(x.id == y.id),
        (Value::List(x), Value::List(y)) => {
            let mut xs = x.iter();
            let mut ys = y.iter();
            loop {
                match (xs.next(), ys.next()) {
                    (None, None) => return Ok(true),
                    (Some(_), None) | (None, Some(_)) => return Ok(false),
                    (Some(xe), Some(ye)) => {
                        if !value_eq(xe, ye)? {
                            return Ok(false);
                        }
                    }
                }
            }
        }
        _ => Err((a.type_name(), b.type_name())),
    }
}

/// Printable rendering; objects have none (printing one is a runtime error).
pub fn format_value(v: &Value) -> Option<String> {
    match v {
        Value::Int(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Unit => Some("()".to_string()),
        Value::List(l) => {
            let mut parts = Vec::new();
            for e in l.iter() {
                parts.push(format_value(e)?);
            }
            Some(format!("[{}]", parts.join(" ")))
        }
        Value::Obj(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(ns: &[i64]) -> PList {
        PList::from_values(ns.iter().map(|n| Value::Int(*n)).collect::<Vec<_>>())
    }

    #[test]
    fn cons_shares_instead_of_copying() {
        let base = ints(&[2, 3]);
        let a = PList::cons(Value::Int(1), &base);
        let b = PList::cons(Value::Int(9), &base);
        assert_eq!(a.len(), 3);
        assert_eq!(b.len(), 3);
        // base unchanged by either extension
        assert_eq!(format_value(&Value::List(base)).unwrap(), "[2 3]");
        assert_eq!(format_value(&Value::List(a)).unwrap(), "[1 2 3]");
        assert_eq!(format_value(&Value::List(b)).unwrap(), "[9 2 3]");
    }

    #[test]
    fn head_and_tail_of_nil_are_none() {
        let n = PList::nil();
        assert!(n.is_nil());
        assert!(n.head().is_none());
        assert!(n.tail().is_none());
    }

    #[test]
    fn equality_is_structural_for_lists_and_identity_for_objects() {
        assert_eq!(value_eq(&Value::List(ints(&[1, 2])), &Value::List(ints(&[1, 2]))), Ok(true));
        assert_eq!(value_eq(&Value::List(ints(&[1])), &Value::List(ints(&[1, 2]))), Ok(false));
        let o1 = Value::Obj(ObjRef { id: 0, frozen: false });
        let o2 = Value::Obj(ObjRef { id: 0, frozen: true });
        let o3 = Value::Obj(ObjRef { id: 1, frozen: false });
        assert_eq!(value_eq(&o1, &o2), Ok(true)); // frozen-ness is not identity
        assert_eq!(value_eq(&o1, &o3), Ok(false));
    }

    #[test]
    fn mixed_type_equality_is_an_error() {
        assert!(value_eq(&Value::Int(1), &Value::Bool(true)).is_err());
        assert!(value_eq(&Value::List(ints(&[1])), &Value::Int(1)).is_err());
    }

    #[test]
    fn formatting_matches_the_printed_shapes() {
        assert_eq!(format_value(&Value::Int(-3)).unwrap(), "-3");
        assert_eq!(format_value(&Value::Bool(true)).unwrap(), "true");
        assert_eq!(format_value(&Value::Unit).unwrap(), "()");
        assert_eq!(format_value(&Value::List(PList::nil())).unwrap(), "[]");
        let nested = PList::cons(Value::List(ints(&[2, 3])), &ints(&[4]));
        assert_eq!(
            format_value(&Value::List(PList::cons(Value::Int(1), &nested))).unwrap(),
            "[1 [2 3] 4]"
        );
        assert!(format_value(&Value::Obj(ObjRef { id: 0, frozen: false })).is_none());
    }
}
