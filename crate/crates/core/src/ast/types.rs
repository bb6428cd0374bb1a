use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// A JVM type as it appears in field and method descriptors.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum JavaType {
    Byte,
    Char,
    Double,
    Float,
    Int,
    Long,
    Short,
    Boolean,
    /// Only valid in return position.
    Void,
    /// Class or interface, in binary form (`java/lang/String`).
    Object(String),
    Array(Box<JavaType>),
}

impl JavaType {
    pub fn object(name: impl Into<String>) -> Self {
        JavaType::Object(name.into())
    }

    pub fn array_of(element: JavaType) -> Self {
        JavaType::Array(Box::new(element))
    }

    /// Parses a complete field descriptor such as `I` or `[Ljava/lang/String;`.
    pub fn parse_field_descriptor(descriptor: &str) -> Option<JavaType> {
        let (ty, rest) = parse_one(descriptor.as_bytes())?;
        if !rest.is_empty() || ty == JavaType::Void {
            return None;
        }
        Some(ty)
    }

    /// Parses a method descriptor into `(args, return)`.
    pub fn parse_method_descriptor(descriptor: &str) -> Option<(Vec<JavaType>, JavaType)> {
        let bytes = descriptor.as_bytes();
        let mut rest = bytes.strip_prefix(b"(")?;
        let mut args = Vec::new();
        loop {
            if let Some(after) = rest.strip_prefix(b")") {
                rest = after;
                break;
            }
            let (arg, after) = parse_one(rest)?;
            if arg == JavaType::Void {
                return None;
            }
            args.push(arg);
            rest = after;
        }
        let (ret, after) = parse_one(rest)?;
        if !after.is_empty() {
            return None;
        }
        Some((args, ret))
    }

    pub fn descriptor(&self) -> String {
        let mut out = String::new();
        self.write_descriptor(&mut out);
        out
    }

    pub(crate) fn write_descriptor(&self, out: &mut String) {
        match self {
            JavaType::Byte => out.push('B'),
            JavaType::Char => out.push('C'),
            JavaType::Double => out.push('D'),
            JavaType::Float => out.push('F'),
            JavaType::Int => out.push('I'),
            JavaType::Long => out.push('J'),
            JavaType::Short => out.push('S'),
            JavaType::Boolean => out.push('Z'),
            JavaType::Void => out.push('V'),
            JavaType::Object(name) => {
                out.push('L');
                out.push_str(name);
                out.push(';');
            }
            JavaType::Array(element) => {
                out.push('[');
                element.write_descriptor(out);
            }
        }
    }

    /// True if `void` appears anywhere other than the outermost position.
    pub(crate) fn has_nested_void(&self) -> bool {
        match self {
            JavaType::Array(element) => **element == JavaType::Void || element.has_nested_void(),
            _ => false,
        }
    }
}

fn parse_one(bytes: &[u8]) -> Option<(JavaType, &[u8])> {
    let (&first, rest) = bytes.split_first()?;
    let ty = match first {
        b'B' => JavaType::Byte,
        b'C' => JavaType::Char,
        b'D' => JavaType::Double,
        b'F' => JavaType::Float,
        b'I' => JavaType::Int,
        b'J' => JavaType::Long,
        b'S' => JavaType::Short,
        b'Z' => JavaType::Boolean,
        b'V' => JavaType::Void,
        b'L' => {
            let end = rest.iter().position(|&b| b == b';')?;
            if end == 0 {
                return None;
            }
            let name = core::str::from_utf8(&rest[..end]).ok()?;
            return Some((JavaType::Object(name.into()), &rest[end + 1..]));
        }
        b'[' => {
            let (element, after) = parse_one(rest)?;
            if element == JavaType::Void {
                return None;
            }
            return Some((JavaType::Array(Box::new(element)), after));
        }
        _ => return None,
    };
    Some((ty, rest))
}

impl fmt::Display for JavaType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JavaType::Byte => f.write_str("byte"),
            JavaType::Char => f.write_str("char"),
            JavaType::Double => f.write_str("double"),
            JavaType::Float => f.write_str("float"),
            JavaType::Int => f.write_str("int"),
            JavaType::Long => f.write_str("long"),
            JavaType::Short => f.write_str("short"),
            JavaType::Boolean => f.write_str("boolean"),
            JavaType::Void => f.write_str("void"),
            JavaType::Object(name) => f.write_str(name),
            JavaType::Array(element) => write!(f, "{element}[]"),
        }
    }
}

/// Method identity: two methods are comparable iff their signatures are equal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Signature {
    pub name: String,
    pub return_type: JavaType,
    pub args: Vec<JavaType>,
}

impl Signature {
    pub fn new(name: impl Into<String>, return_type: JavaType, args: Vec<JavaType>) -> Self {
        Signature {
            name: name.into(),
            return_type,
            args,
        }
    }

    pub fn from_descriptor(name: &str, descriptor: &str) -> Option<Self> {
        let (args, return_type) = JavaType::parse_method_descriptor(descriptor)?;
        Some(Signature {
            name: name.into(),
            return_type,
            args,
        })
    }

    pub fn descriptor(&self) -> String {
        let mut out = String::from("(");
        for arg in &self.args {
            arg.write_descriptor(&mut out);
        }
        out.push(')');
        self.return_type.write_descriptor(&mut out);
        out
    }

    /// Writes `name(arg, arg)` without the return type.
    pub(crate) fn fmt_call(&self, name: &str, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{name}(")?;
        for (i, arg) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{arg}")?;
        }
        f.write_str(")")
    }
}

/// Renders as `int sqX()`, the way methods are listed in patch dumps.
impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", self.return_type)?;
        self.fmt_call(&self.name, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn descriptors_roundtrip() {
        for d in ["I", "[[J", "Ljava/lang/String;", "[Ltoy/Foo;", "Z"] {
            let ty = JavaType::parse_field_descriptor(d).unwrap();
            assert_eq!(ty.descriptor(), d);
        }
        let sig = Signature::from_descriptor("setX", "(I)V").unwrap();
        assert_eq!(sig.args, vec![JavaType::Int]);
        assert_eq!(sig.return_type, JavaType::Void);
        assert_eq!(sig.descriptor(), "(I)V");
        assert_eq!(sig.to_string(), "void setX(int)");
    }

    #[test]
    fn rejects_malformed_descriptors() {
        for d in ["", "V", "[V", "L;", "Ljava/lang/String", "II", "Q"] {
            assert!(JavaType::parse_field_descriptor(d).is_none(), "{d}");
        }
        for d in ["()", "(V)V", "I", "(I", "()VV"] {
            assert!(JavaType::parse_method_descriptor(d).is_none(), "{d}");
        }
    }
}
