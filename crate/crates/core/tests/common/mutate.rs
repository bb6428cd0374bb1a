//! Random edits to class ASTs, for diff/apply identity tests.

use aspa_core::{
    AttributeAst, AttributeContent, ClassAst, CodeAst, ConstantValue, ExceptionHandler, FieldAst, Instruction,
    JavaType, LineNumber, MethodAst, Opcode, Operand, Signature, emit_class, parse_class, validate, ViolationKind,
};
use rand::seq::SliceRandom;
use rand::Rng;

const CONSTANT_OPS: [Opcode; 7] = [
    Opcode::IconstM1,
    Opcode::Iconst0,
    Opcode::Iconst1,
    Opcode::Iconst2,
    Opcode::Iconst3,
    Opcode::Iconst4,
    Opcode::Iconst5,
];

fn random_type(rng: &mut impl Rng) -> JavaType {
    match rng.gen_range(0..5) {
        0 => JavaType::Int,
        1 => JavaType::Long,
        2 => JavaType::Boolean,
        3 => JavaType::object("java/lang/String"),
        _ => JavaType::array_of(JavaType::Double),
    }
}

fn random_string(rng: &mut impl Rng) -> String {
    let pool = ['a', 'b', 'Z', '0', '_', '\0', 'é', '€', '\u{1F600}'];
    (0..rng.gen_range(0..8)).map(|_| *pool.choose(rng).unwrap()).collect()
}

fn random_instruction(rng: &mut impl Rng) -> Instruction {
    match rng.gen_range(0..5) {
        0 => Instruction::simple(*CONSTANT_OPS.choose(rng).unwrap()),
        1 => Instruction::simple(Opcode::Nop),
        2 => Instruction::new(Opcode::Bipush, Operand::Int(rng.gen_range(-128..128))),
        3 => Instruction::new(Opcode::Ldc, Operand::Constant(ConstantValue::String(random_string(rng)))),
        _ => Instruction::new(Opcode::Iload, Operand::Local(rng.gen_range(0..300))),
    }
}

fn code_methods(class: &mut ClassAst) -> Vec<&mut CodeAst> {
    class.methods.iter_mut().filter_map(MethodAst::code_mut).collect()
}

fn fresh(rng: &mut impl Rng, prefix: &str, taken: impl Fn(&str) -> bool) -> String {
    loop {
        let name = format!("{prefix}{}", rng.gen_range(0..1_000_000));
        if !taken(&name) {
            return name;
        }
    }
}

fn toggle(attributes: &mut Vec<AttributeAst>, content: AttributeContent) {
    let name = content.standard_name().unwrap();
    if let Some(i) = attributes.iter().position(|a| a.name == name) {
        attributes.remove(i);
    } else {
        attributes.push(AttributeAst::new(content));
    }
}

/// Applies one random edit. Returns a short label of what was done.
pub fn mutate_once(class: &mut ClassAst, rng: &mut impl Rng) -> &'static str {
    match rng.gen_range(0..16) {
        0 => {
            let name = fresh(rng, "f", |n| class.field(n).is_some());
            let flags = *[0x0001, 0x0002, 0x0008 | 0x0010].choose(rng).unwrap();
            let field = FieldAst::new(&name, random_type(rng), flags);
            let at = rng.gen_range(0..=class.fields.len());
            class.fields.insert(at, field);
            "add field"
        }
        1 if !class.fields.is_empty() => {
            let i = rng.gen_range(0..class.fields.len());
            class.fields.remove(i);
            "remove field"
        }
        2 if !class.fields.is_empty() => {
            let f = class.fields.choose_mut(rng).unwrap();
            if rng.gen() {
                f.flags ^= 0x0040;
            } else {
                f.ty = random_type(rng);
            }
            "edit field"
        }
        3 => {
            let name = fresh(rng, "m", |n| class.methods.iter().any(|m| m.signature.name == n));
            let code = CodeAst {
                instructions: vec![random_instruction(rng), Instruction::simple(Opcode::Return)],
                max_stack: 1,
                max_locals: 1,
                exception_table: Vec::new(),
                attributes: Vec::new(),
            };
            let method = MethodAst {
                signature: Signature::new(name, JavaType::Void, vec![]),
                flags: 0x0001,
                attributes: vec![AttributeAst::new(AttributeContent::Code(code))],
            };
            let at = rng.gen_range(0..=class.methods.len());
            class.methods.insert(at, method);
            "add method"
        }
        4 if !class.methods.is_empty() => {
            let i = rng.gen_range(0..class.methods.len());
            class.methods.remove(i);
            "remove method"
        }
        5 => {
            class.fields.shuffle(rng);
            class.methods.shuffle(rng);
            class.constants.shuffle(rng);
            class.interfaces.shuffle(rng);
            "reorder"
        }
        6..=9 => {
            let mut codes = code_methods(class);
            let Some(code) = codes.choose_mut(rng) else {
                return "no code";
            };
            let len = code.instructions.len();
            match rng.gen_range(0..4) {
                0 => code.instructions.insert(rng.gen_range(0..=len), random_instruction(rng)),
                1 if len > 1 => {
                    code.instructions.remove(rng.gen_range(0..len));
                }
                2 if len > 0 => code.instructions[rng.gen_range(0..len)] = random_instruction(rng),
                _ => code.max_stack = code.max_stack.wrapping_add(1),
            }
            "edit instructions"
        }
        10 => {
            let c = match rng.gen_range(0..3) {
                0 => ConstantValue::Utf8(random_string(rng)),
                1 => ConstantValue::Integer(rng.gen()),
                _ => ConstantValue::Double(rng.gen()),
            };
            if !class.constants.contains(&c) {
                class.constants.push(c);
            }
            "add constant"
        }
        11 if !class.constants.is_empty() => {
            let i = rng.gen_range(0..class.constants.len());
            class.constants.remove(i);
            "remove constant"
        }
        12 => {
            match rng.gen_range(0..3) {
                0 => toggle(&mut class.attributes, AttributeContent::Deprecated),
                1 => {
                    class.attributes.retain(|a| a.name != "test.Blob");
                    let bytes = (0..rng.gen_range(0..16)).map(|_| rng.gen()).collect();
                    class.attributes.push(AttributeAst::opaque("test.Blob", bytes));
                }
                _ => {
                    class.attributes.retain(|a| !matches!(a.content, AttributeContent::SourceFile(_)));
                    if rng.gen() {
                        let name = format!("{}.java", random_string(rng));
                        class.attributes.push(AttributeAst::new(AttributeContent::SourceFile(name)));
                    }
                }
            }
            "edit class attribute"
        }
        13 if !class.methods.is_empty() => {
            let m = class.methods.choose_mut(rng).unwrap();
            if rng.gen() {
                toggle(&mut m.attributes, AttributeContent::Deprecated);
            } else {
                m.flags ^= 0x0010;
            }
            "edit method"
        }
        14 => {
            let mut codes = code_methods(class);
            let Some(code) = codes.choose_mut(rng) else {
                return "no code";
            };
            let n = code.instructions.len() as u32;
            if rng.gen() {
                let start = rng.gen_range(0..n.max(1));
                code.exception_table.push(ExceptionHandler {
                    start,
                    end: n.max(start + 1),
                    handler: rng.gen_range(0..n.max(1)),
                    catch_type: rng.gen::<bool>().then(|| "java/lang/Throwable".to_string()),
                });
            } else {
                let line = LineNumber {
                    start: rng.gen_range(0..n.max(1)),
                    line: rng.gen(),
                };
                match code.attributes.iter_mut().find_map(|a| match &mut a.content {
                    AttributeContent::LineNumberTable(t) => Some(t),
                    _ => None,
                }) {
                    Some(table) => table.push(line),
                    None => code
                        .attributes
                        .push(AttributeAst::new(AttributeContent::LineNumberTable(vec![line]))),
                }
            }
            "edit code attributes"
        }
        _ => {
            match rng.gen_range(0..4) {
                0 => class.flags ^= 0x0010,
                1 => class.version = rng.gen_range(49u32..=52) << 16,
                2 => {
                    let name = fresh(rng, "toy/I", |n| class.interfaces.iter().any(|i| i == n));
                    class.interfaces.push(name);
                }
                _ => {
                    class.interfaces.pop();
                }
            }
            "edit class header"
        }
    }
}

/// Between one and `max` random edits, retried until the result is a
/// valid class. The result is round-tripped through the codec, so its
/// constants are exactly those of the emitted pool.
pub fn mutate(class: &ClassAst, rng: &mut impl Rng, max: usize) -> ClassAst {
    loop {
        let mut out = class.clone();
        for _ in 0..rng.gen_range(1..=max) {
            mutate_once(&mut out, rng);
        }
        if validate(&out).iter().any(|v| v.kind != ViolationKind::MissingConstant) {
            continue;
        }
        if let Ok(bytes) = emit_class(&out) {
            return parse_class(&bytes).expect("emitted class parses");
        }
    }
}
