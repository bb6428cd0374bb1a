//! The fixture corpus: the toy `Foo` pair plus classes exercising every
//! structured attribute, operand shape and pool tag the codec supports.

use crate::asm::{ClassFile, Const, Field, InnerClassRow, Method, RawAttr};

const PUBLIC: u16 = 0x0001;
const PRIVATE: u16 = 0x0002;
const STATIC: u16 = 0x0008;
const FINAL: u16 = 0x0010;
const SUPER: u16 = 0x0020;
const SYNTHETIC: u16 = 0x1000;
const ABSTRACT: u16 = 0x0400;
const INTERFACE: u16 = 0x0200;

const INIT: &str = "
    aload_0
    invokespecial java/lang/Object.<init>()V
    return
";

/// Old `toy/Foo`: field `x`; constructor storing 0; `sqX`; `getX`.
/// Laid out like `javac -g:none` output for a package-private class.
pub fn foo_old_class() -> ClassFile {
    ClassFile::new("toy/Foo")
        .flags(SUPER)
        .field(PRIVATE, "x", "I")
        .method(
            PUBLIC,
            "<init>",
            "()V",
            2,
            1,
            "
    aload_0
    invokespecial java/lang/Object.<init>()V
    aload_0
    iconst_0
    putfield toy/Foo.x:I
    return
",
        )
        .method(
            PUBLIC,
            "sqX",
            "()I",
            2,
            1,
            "
    aload_0
    getfield toy/Foo.x:I
    aload_0
    getfield toy/Foo.x:I
    imul
    ireturn
",
        )
        .method(
            PUBLIC,
            "getX",
            "()I",
            1,
            1,
            "
    aload_0
    getfield toy/Foo.x:I
    ireturn
",
        )
}

/// New `toy/Foo`: fields `x`, `y`; `sqX` moved first; constructor storing
/// 1 and 0; `getX` gone; `setX` added.
pub fn foo_new_class() -> ClassFile {
    ClassFile::new("toy/Foo")
        .flags(SUPER)
        .field(PRIVATE, "x", "I")
        .field(PRIVATE, "y", "I")
        .method(
            PUBLIC,
            "sqX",
            "()I",
            2,
            1,
            "
    aload_0
    getfield toy/Foo.x:I
    aload_0
    getfield toy/Foo.x:I
    imul
    ireturn
",
        )
        .method(
            PUBLIC,
            "<init>",
            "()V",
            2,
            1,
            "
    aload_0
    invokespecial java/lang/Object.<init>()V
    aload_0
    iconst_1
    putfield toy/Foo.x:I
    aload_0
    iconst_0
    putfield toy/Foo.y:I
    return
",
        )
        .method(
            PUBLIC,
            "setX",
            "(I)V",
            2,
            2,
            "
    aload_0
    iload_1
    putfield toy/Foo.x:I
    return
",
        )
}

pub fn foo_old() -> Vec<u8> {
    foo_old_class().bytes()
}

pub fn foo_new() -> Vec<u8> {
    foo_new_class().bytes()
}

/// Branches, both switch kinds, exception handlers, stack map frames, line
/// and local-variable tables, `Exceptions`, a static initializer and
/// `ConstantValue` fields of every loadable kind.
pub fn shapes_class() -> ClassFile {
    let constant = |name: &str, desc: &str, c: Const| Field {
        flags: PUBLIC | STATIC | FINAL,
        name: name.into(),
        descriptor: desc.into(),
        constant: Some(c),
        signature: None,
        synthetic: false,
        deprecated: false,
    };
    ClassFile::new("toy/Shapes")
        .source_file("Shapes.java")
        .field_with(constant("ANSWER", "I", Const::Int(42)))
        .field_with(constant("BIG", "J", Const::Long(1 << 40)))
        .field_with(constant("HALF", "F", Const::Float(0.5f32.to_bits())))
        .field_with(constant("PI", "D", Const::Double(std::f64::consts::PI.to_bits())))
        .field_with(constant("NAME", "Ljava/lang/String;", Const::Str("shapes".into())))
        .field(PRIVATE | STATIC, "counter", "I")
        .field(PRIVATE, "grid", "[[I")
        .method(PUBLIC, "<init>", "()V", 1, 1, INIT)
        .method(
            PUBLIC | STATIC,
            "classify",
            "(I)Ljava/lang/String;",
            1,
            1,
            "
    .line 10
    iload_0
    tableswitch 0 Other Zero One Two
Zero:
    .frame same
    .line 11
    ldc \"zero\"
    areturn
One:
    .frame same
    ldc \"one\"
    areturn
Two:
    .frame same
    ldc \"two\"
    areturn
Other:
    .frame same
    iload_0
    lookupswitch Neg -1:Minus 100:Hundred 1000:Thousand
Minus:
    .frame same
    ldc \"minus\"
    areturn
Hundred:
    .frame same
    ldc \"hundred\"
    areturn
Thousand:
    .frame same
    ldc \"thousand\"
    areturn
Neg:
    .frame same
    .line 20
    ldc \"other\"
    areturn
",
        )
        .method_with(Method {
            flags: PUBLIC,
            name: "risky".into(),
            descriptor: "(Ljava/lang/String;)I".into(),
            code: Some((
                3,
                3,
                "
Start:
    aload_1
    invokestatic java/lang/Integer.parseInt(Ljava/lang/String;)I
    istore_2
    iload_2
    ifge Done
    new java/lang/IllegalArgumentException
    dup
    ldc \"negative\"
    invokespecial java/lang/IllegalArgumentException.<init>(Ljava/lang/String;)V
    athrow
Done:
    .frame append I
    iload_2
End:
    ireturn
Handler:
    .frame full toy/Shapes java/lang/String / java/lang/NumberFormatException
    astore_2
    iconst_m1
    ireturn
Finally:
    .frame full toy/Shapes java/lang/String / java/lang/Throwable
    athrow
    .catch java/lang/NumberFormatException Start End Handler
    .catch any Start End Finally
    .var 0 this Ltoy/Shapes; Start End
    .var 1 text Ljava/lang/String; Start End
"
                .into(),
            )),
            throws: vec!["java/io/IOException".into(), "java/lang/IllegalStateException".into()],
            signature: None,
            deprecated: false,
            raw: Vec::new(),
        })
        .method(
            PUBLIC,
            "sum",
            "([I)J",
            4,
            5,
            "
    lconst_0
    lstore_2
    iconst_0
    istore 4
Loop:
    .frame append J I
    iload 4
    aload_1
    arraylength
    if_icmpge Exit
    lload_2
    aload_1
    iload 4
    iaload
    i2l
    ladd
    lstore_2
    iinc 4 1
    goto Loop
Exit:
    .frame chop 2
    aload_0
    iconst_3
    iconst_4
    multianewarray [[I 2
    putfield toy/Shapes.grid:[[I
    aload_0
    getfield toy/Shapes.grid:[[I
    checkcast [[I
    instanceof java/lang/Object
    pop
    bipush 10
    newarray int
    pop
    iconst_2
    anewarray java/lang/String
    pop
    lload_2
    ldc2_w 7L
    lmul
    ldc2_w 2.5d
    d2l
    ladd
    lreturn
",
        )
        .method(
            STATIC,
            "<clinit>",
            "()V",
            1,
            0,
            "
    sipush -300
    putstatic toy/Shapes.counter:I
    getstatic java/lang/System.out:Ljava/io/PrintStream;
    ldc class toy/Shapes
    invokevirtual java/io/PrintStream.println(Ljava/lang/Object;)V
    return
",
        )
        .method(
            PUBLIC,
            "size",
            "(Ljava/util/List;)I",
            1,
            2,
            "
    aload_1
    invokeinterface java/util/List.size()I
    ireturn
",
        )
}

/// An interface with abstract members, generic signatures and deprecation.
pub fn api_class() -> ClassFile {
    let mut c = ClassFile::new("toy/Api")
        .flags(PUBLIC | INTERFACE | ABSTRACT)
        .implements("java/lang/Comparable")
        .declare(PUBLIC | ABSTRACT, "describe", "()Ljava/lang/String;")
        .method_with(Method {
            flags: PUBLIC | ABSTRACT,
            name: "items".into(),
            descriptor: "()Ljava/util/List;".into(),
            code: None,
            throws: Vec::new(),
            signature: Some("()Ljava/util/List<Ljava/lang/String;>;".into()),
            deprecated: true,
            raw: Vec::new(),
        });
    c.signature = Some("Ljava/lang/Object;Ljava/lang/Comparable<Ltoy/Api;>;".into());
    c.deprecated = true;
    c.version(51, 0)
}

/// A member class with `InnerClasses` and a synthetic outer reference.
pub fn inner_class() -> ClassFile {
    let mut c = ClassFile::new("toy/Outer$Inner")
        .flags(SUPER)
        .field_with(Field {
            flags: FINAL | SYNTHETIC,
            name: "this$0".into(),
            descriptor: "Ltoy/Outer;".into(),
            constant: None,
            signature: None,
            synthetic: true,
            deprecated: false,
        })
        .method(
            0,
            "<init>",
            "(Ltoy/Outer;)V",
            2,
            2,
            "
    aload_0
    aload_1
    putfield toy/Outer$Inner.this$0:Ltoy/Outer;
    aload_0
    invokespecial java/lang/Object.<init>()V
    return
",
        )
        .source_file("Outer.java");
    c.inner_classes = vec![
        InnerClassRow {
            inner: "toy/Outer$Inner".into(),
            outer: Some("toy/Outer".into()),
            name: Some("Inner".into()),
            flags: 0,
        },
        InnerClassRow {
            inner: "toy/Outer$1".into(),
            outer: None,
            name: None,
            flags: 0x0008,
        },
    ];
    c.version(50, 0)
}

/// Old class-file version with `jsr`/`ret`, wide locals and wide `iinc`.
pub fn legacy_class() -> ClassFile {
    ClassFile::new("toy/Legacy")
        .version(45, 3)
        .method(PUBLIC, "<init>", "()V", 1, 1, INIT)
        .method(
            PUBLIC | STATIC,
            "wide",
            "(I)I",
            2,
            400,
            "
    iload_0
    istore 300
    iinc 300 1000
    iinc 3 -2
    jsr Sub
    iload 300
    ireturn
Sub:
    astore 301
    iinc 300 1
    ret 301
",
        )
}

/// Unusual strings and floats, and enough constants to force `ldc_w`.
pub fn strings_class() -> ClassFile {
    let mut body = String::new();
    for i in 0..300 {
        body.push_str(&format!("    ldc \"s{i}\"\n    pop\n"));
    }
    body.push_str(
        "
    ldc \"nul\\0inside\"
    pop
    ldc \"caf\\u00e9 \\u2603 \\U01F600\"
    pop
    ldc fbits 0x7fc00001
    pop
    ldc -2147483648
    pop
    ldc2_w dbits 0x7ff8000000000001
    pop2
    ldc type (I)V
    pop
    return
",
    );
    ClassFile::new("toy/Strings")
        .method(PUBLIC, "<init>", "()V", 1, 1, INIT)
        .method(PUBLIC | STATIC, "load", "()V", 2, 0, &body)
        .constant(Const::Utf8("unused".into()))
        .constant(Const::Long(-1))
        .constant(Const::Method("toy/Gone".into(), "m".into(), "()V".into()))
}

/// A relocatable custom attribute at class and method level.
pub fn custom_class() -> ClassFile {
    let mut c = ClassFile::new("toy/Custom").method_with(Method {
        flags: PUBLIC,
        name: "<init>".into(),
        descriptor: "()V".into(),
        code: Some((1, 1, INIT.into())),
        throws: Vec::new(),
        signature: None,
        deprecated: false,
        raw: vec![RawAttr {
            name: "toy.Note".into(),
            bytes: b"ctor".to_vec(),
        }],
    });
    c.raw.push(RawAttr {
        name: "toy.Marker".into(),
        bytes: vec![0xde, 0xad, 0xbe, 0xef],
    });
    c
}

/// `java/lang/Object` look-alike: no superclass.
pub fn root_class() -> ClassFile {
    ClassFile::new("java/lang/Object")
        .superclass(None)
        .method(PUBLIC, "<init>", "()V", 0, 1, "    return\n")
        .declare(PUBLIC | 0x0100, "hashCode", "()I")
}

/// Every fixture class by binary name.
pub fn corpus() -> Vec<(String, ClassFile)> {
    [
        foo_old_class(),
        shapes_class(),
        api_class(),
        inner_class(),
        legacy_class(),
        strings_class(),
        custom_class(),
        root_class(),
    ]
    .into_iter()
    .map(|c| (c.name.clone(), c))
    .chain(std::iter::once(("toy/Foo#new".to_string(), foo_new_class())))
    .collect()
}

/// Class with `methods` small methods `m0()I`, `m1()I`, .... If `tweak` is
/// `Some(i)`, one instruction of method `i` differs.
pub fn generated_class(name: &str, methods: usize, tweak: Option<usize>) -> ClassFile {
    let mut c = ClassFile::new(name).method(PUBLIC, "<init>", "()V", 1, 1, INIT).field(PRIVATE, "state", "I");
    for i in 0..methods {
        let k = if tweak == Some(i) { 4 } else { 3 };
        let body = format!(
            "
    aload_0
    getfield {name}.state:I
    sipush {i}
    iadd
    iconst_{k}
    imul
    ireturn
"
        );
        c = c.method(PUBLIC, &format!("m{i}"), "()I", 2, 1, &body);
    }
    c
}
