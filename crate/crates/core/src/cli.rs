//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 not well-formed,
//! 3 validation failure, 4 bad definition, schema or stylesheet.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::databind::{derive_bindings, unmarshal, BindingError};
use crate::schema::{load_schema, validate, Schema, SchemaError, ValidationReport};
use crate::stf::{
    check_result, check_setup, gen_header, gen_result_schema, gen_setup_schema, load_defn, DefnError, ModuleDefn,
};
use crate::xml::{extend_scope, parse_tree, to_xml_string, NamespaceMap, XmlDocument};
use crate::xpath::{compile_expr, evaluate, DocView, EvalContext, XPathValue};
use crate::xslt::{load_stylesheet, transform, XsltError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NOT_WELL_FORMED: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_DEFINITION: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "stfxml",
    version,
    about = "XML toolchain for test-module definitions, setups and results"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that a document is well-formed.
    Check { file: PathBuf },
    /// Validate a document against a schema.
    Validate {
        #[arg(long)]
        schema: PathBuf,
        file: PathBuf,
    },
    /// Evaluate an expression with the document node as context.
    Xpath { expr: String, file: PathBuf },
    /// Run a stylesheet over a document.
    Transform {
        #[arg(long)]
        xsl: PathBuf,
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Bind a document to typed values and print them.
    Bind {
        #[arg(long)]
        schema: PathBuf,
        file: PathBuf,
        /// Print the size of a repeated field instead, e.g. `atwd[0]/channel`.
        #[arg(long)]
        count: Option<String>,
    },
    /// Test-module definition tools.
    #[command(subcommand)]
    Stf(StfCommand),
}

#[derive(Subcommand, Debug)]
enum StfCommand {
    /// Generate the C header for a module definition.
    GenHeader {
        defn: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate the schema for the module's setup documents.
    GenSetupSchema {
        defn: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate the schema for the module's result documents.
    GenResultSchema {
        defn: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a setup document against a definition.
    CheckSetup { defn: PathBuf, setup: PathBuf },
    /// Check a result document against a definition.
    CheckResult { defn: PathBuf, result: PathBuf },
}

/// A failed invocation: exit code plus the diagnostic for stderr.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn at(code: i32, file: &str, line: Option<usize>, message: impl std::fmt::Display) -> Self {
        match line {
            Some(l) => Failure::new(code, format!("{file}:{l}: {message}")),
            None => Failure::new(code, format!("{file}: {message}")),
        }
    }
}

/// What a successful command produced.
struct Success {
    /// Primary output, sent to `-o` when given.
    output: Vec<u8>,
    target: Option<PathBuf>,
}

/// A report to print along with exit code 3.
struct Rejected {
    report: ValidationReport,
    file: String,
}

enum Outcome {
    Done(Success),
    Invalid(Rejected),
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
}

impl Io<'_> {
    fn read(&mut self, path: &PathBuf) -> Result<Vec<u8>, Failure> {
        if path.as_os_str() == "-" {
            let mut buf = Vec::new();
            self.stdin
                .read_to_end(&mut buf)
                .map_err(|e| Failure::new(EXIT_USAGE, format!("<stdin>: {e}")))?;
            return Ok(buf);
        }
        std::fs::read(path).map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))
    }

    fn parse(&mut self, path: &PathBuf) -> Result<XmlDocument, Failure> {
        let bytes = self.read(path)?;
        parse_tree(&bytes).map_err(|e| Failure::at(EXIT_NOT_WELL_FORMED, &display(path), Some(e.line), &e.message))
    }

    fn schema(&mut self, path: &PathBuf) -> Result<Schema, Failure> {
        let doc = self.parse(path)?;
        load_schema(&doc).map_err(|e| schema_failure(&display(path), &e))
    }

    fn defn(&mut self, path: &PathBuf) -> Result<ModuleDefn, Failure> {
        let doc = self.parse(path)?;
        load_defn(&doc).map_err(|e| match e {
            DefnError::Invalid(report) => {
                let lines: Vec<String> = report
                    .violations
                    .iter()
                    .map(|v| format!("{}:{}: {}: {}", display(path), v.line, v.kind, v.message))
                    .collect();
                Failure::new(EXIT_DEFINITION, lines.join("\n"))
            }
            DefnError::Semantic { message, line } => Failure::at(EXIT_DEFINITION, &display(path), Some(line), message),
        })
    }
}

fn display(path: &Path) -> String {
    if path.as_os_str() == "-" {
        "<stdin>".to_string()
    } else {
        path.display().to_string()
    }
}

fn schema_failure(file: &str, e: &SchemaError) -> Failure {
    let (line, message) = match e {
        SchemaError::UnsupportedConstruct { name, line } => {
            (Some(*line), format!("unsupported schema construct \"{name}\""))
        }
        SchemaError::UnresolvedType(name) => (None, format!("unresolved type \"{name}\"")),
        SchemaError::InapplicableFacet { facet, base, line } => {
            (Some(*line), format!("facet {facet} cannot restrict {base}"))
        }
        SchemaError::Invalid { message, line } => (Some(*line), message.clone()),
        SchemaError::XPath { source, line } => (Some(*line), source.to_string()),
    };
    Failure::at(EXIT_DEFINITION, file, line, message)
}

fn xslt_failure(file: &str, e: &XsltError) -> Failure {
    let (line, message) = match e {
        XsltError::UnsupportedInstruction { name, line } => {
            (Some(*line), format!("unsupported instruction \"{name}\""))
        }
        XsltError::Invalid { message, line } => (Some(*line), message.clone()),
        XsltError::UndeclaredVariable { name, line } => (Some(*line), format!("variable \"${name}\" is not declared")),
        XsltError::XPath { source, line } => (Some(*line), source.to_string()),
        XsltError::Evaluation(m) => (None, m.clone()),
    };
    Failure::at(EXIT_DEFINITION, file, line, message)
}

fn done(output: impl Into<Vec<u8>>, target: Option<PathBuf>) -> Outcome {
    Outcome::Done(Success {
        output: output.into(),
        target,
    })
}

fn report_outcome(report: ValidationReport, file: &Path, ok_line: String) -> Outcome {
    if report.is_valid() {
        done(ok_line, None)
    } else {
        Outcome::Invalid(Rejected {
            report,
            file: display(file),
        })
    }
}

fn execute(command: Command, io: &mut Io<'_>) -> Result<Outcome, Failure> {
    match command {
        Command::Check { file } => {
            io.parse(&file)?;
            Ok(done(format!("{}: well-formed\n", display(&file)), None))
        }
        Command::Validate { schema, file } => {
            let schema = io.schema(&schema)?;
            let doc = io.parse(&file)?;
            Ok(report_outcome(
                validate(&schema, &doc),
                &file,
                format!("{}: valid\n", display(&file)),
            ))
        }
        Command::Xpath { expr, file } => {
            let doc = io.parse(&file)?;
            let scope = extend_scope(&NamespaceMap::new(), &doc.root);
            let compiled = compile_expr(&expr, &scope).map_err(|e| Failure::new(EXIT_USAGE, format!("{expr}: {e}")))?;
            let view = DocView::new(&doc);
            let value = evaluate(&compiled, &EvalContext::new(&view, view.root()))
                .map_err(|e| Failure::new(EXIT_USAGE, format!("{expr}: {e}")))?;
            let mut out = String::new();
            match value {
                XPathValue::NodeSet(nodes) => {
                    for n in nodes {
                        let text = crate::schema::collapse_whitespace(&view.string_value(n));
                        out.push_str(&format!("{}\t{text}\n", view.path(n)));
                    }
                }
                other => out.push_str(&format!("{}\n", other.to_string_value(&view))),
            }
            Ok(done(out, None))
        }
        Command::Transform { xsl, file, output } => {
            let sheet_doc = io.parse(&xsl)?;
            let sheet = load_stylesheet(&sheet_doc).map_err(|e| xslt_failure(&display(&xsl), &e))?;
            let doc = io.parse(&file)?;
            let bytes = transform(&sheet, &doc).map_err(|e| xslt_failure(&display(&xsl), &e))?;
            Ok(done(bytes, output))
        }
        Command::Bind { schema, file, count } => {
            let model = derive_bindings(&io.schema(&schema)?);
            let doc = io.parse(&file)?;
            let value = match unmarshal(&model, &doc) {
                Ok(v) => v,
                Err(BindingError::Invalid(report)) => {
                    return Ok(Outcome::Invalid(Rejected {
                        report,
                        file: display(&file),
                    }))
                }
                Err(e) => return Err(Failure::new(EXIT_DEFINITION, e.to_string())),
            };
            match count {
                None => Ok(done(value.to_string(), None)),
                Some(path) => {
                    let n = value
                        .count(&path)
                        .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
                    Ok(done(count_line(&path, n), None))
                }
            }
        }
        Command::Stf(stf) => execute_stf(stf, io),
    }
}

/// `Found 2 channels in atwd[0]` for the path `atwd[0]/channel`.
fn count_line(path: &str, n: usize) -> String {
    let trimmed = path.trim_matches('/');
    let (parent, last) = match trimmed.rsplit_once('/') {
        Some((p, l)) => (Some(p), l),
        None => (None, trimmed),
    };
    match parent {
        Some(p) => format!("Found {n} {last}s in {p}\n"),
        None => format!("Found {n} {last}s\n"),
    }
}

fn execute_stf(command: StfCommand, io: &mut Io<'_>) -> Result<Outcome, Failure> {
    match command {
        StfCommand::GenHeader { defn, output } => {
            let d = io.defn(&defn)?;
            Ok(done(gen_header(&d), output))
        }
        StfCommand::GenSetupSchema { defn, output } => {
            let d = io.defn(&defn)?;
            Ok(done(to_xml_string(&gen_setup_schema(&d)), output))
        }
        StfCommand::GenResultSchema { defn, output } => {
            let d = io.defn(&defn)?;
            Ok(done(to_xml_string(&gen_result_schema(&d)), output))
        }
        StfCommand::CheckSetup { defn, setup } => {
            let d = io.defn(&defn)?;
            let doc = io.parse(&setup)?;
            Ok(report_outcome(
                check_setup(&d, &doc),
                &setup,
                format!("{}: valid\n", display(&setup)),
            ))
        }
        StfCommand::CheckResult { defn, result } => {
            let d = io.defn(&defn)?;
            let doc = io.parse(&result)?;
            Ok(report_outcome(
                check_result(&d, &doc),
                &result,
                format!("{}: valid\n", display(&result)),
            ))
        }
    }
}

/// Runs one invocation. `args` includes the program name.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    let mut io = Io { stdin };
    match execute(cli.command, &mut io) {
        Ok(Outcome::Done(success)) => match success.target {
            Some(path) if path.as_os_str() != "-" => match std::fs::write(&path, &success.output) {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    let _ = writeln!(stderr, "{}: {e}", path.display());
                    EXIT_USAGE
                }
            },
            _ => match stdout.write_all(&success.output) {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    let _ = writeln!(stderr, "<stdout>: {e}");
                    EXIT_USAGE
                }
            },
        },
        Ok(Outcome::Invalid(rejected)) => {
            let _ = write!(stdout, "{}", rejected.report);
            let n = rejected.report.violations.len();
            let _ = writeln!(
                stderr,
                "{}: {n} violation{}",
                rejected.file,
                if n == 1 { "" } else { "s" }
            );
            EXIT_INVALID
        }
        Err(failure) => {
            let _ = writeln!(stderr, "{}", failure.message);
            failure.code
        }
    }
}

/// Entry point for the binary, wired to the process streams.
pub fn main_with_std() -> i32 {
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(
        std::env::args_os(),
        &mut stdin.lock(),
        &mut stdout.lock(),
        &mut stderr.lock(),
    )
}
