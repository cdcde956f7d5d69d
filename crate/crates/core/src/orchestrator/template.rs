use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TemplateError {
    #[error("template {template} has no placeholder `{{{name}}}`")]
    UnknownPlaceholder { template: &'static str, name: String },
    #[error("template {template} is missing a value for `{{{name}}}`")]
    MissingValue { template: &'static str, name: &'static str },
}

/// Prompt templates shipped with the crate, byte for byte.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Template {
    ModelVerify,
    ExtractAnswer,
    Clarify,
    Decompose,
    SolutionStep,
    Reflection,
    Answer,
}

impl Template {
    pub const ALL: [Template; 7] = [
        Template::ModelVerify,
        Template::ExtractAnswer,
        Template::Clarify,
        Template::Decompose,
        Template::SolutionStep,
        Template::Reflection,
        Template::Answer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Template::ModelVerify => "model_verify",
            Template::ExtractAnswer => "extract_answer",
            Template::Clarify => "action_clarify",
            Template::Decompose => "action_decompose",
            Template::SolutionStep => "action_solution_step",
            Template::Reflection => "action_reflection",
            Template::Answer => "action_answer",
        }
    }

    pub fn text(self) -> &'static str {
        match self {
            Template::ModelVerify => include_str!("../../data/templates/model_verify.txt"),
            Template::ExtractAnswer => include_str!("../../data/templates/extract_answer.txt"),
            Template::Clarify => include_str!("../../data/templates/action_clarify.txt"),
            Template::Decompose => include_str!("../../data/templates/action_decompose.txt"),
            Template::SolutionStep => include_str!("../../data/templates/action_solution_step.txt"),
            Template::Reflection => include_str!("../../data/templates/action_reflection.txt"),
            Template::Answer => include_str!("../../data/templates/action_answer.txt"),
        }
    }

    /// Placeholder names, without braces. Anything else in braces is literal.
    pub fn placeholders(self) -> &'static [&'static str] {
        match self {
            Template::ModelVerify => &["out", "ref"],
            Template::ExtractAnswer => &["Problem", "Solution"],
            Template::Clarify => &["goal"],
            Template::Decompose => &["current_goal", "parent_goal", "solution"],
            Template::SolutionStep => &["current_goal", "solution", "prior_step"],
            Template::Reflection => &["current_goal", "parent_goal", "solution", "parent_goal.target", "parent_goal_tree"],
            Template::Answer => &["solution", "format"],
        }
    }

    pub fn fill(self, values: &[(&str, &str)]) -> Result<String, TemplateError> {
        fill(self, values)
    }
}

/// Substitutes every declared placeholder of `template` in a single pass.
///
/// Substituted text is never rescanned, so values may contain braces or
/// placeholder names. Every declared placeholder needs a value.
pub fn fill(template: Template, values: &[(&str, &str)]) -> Result<String, TemplateError> {
    let names = template.placeholders();
    for (name, _) in values {
        if !names.contains(name) {
            return Err(TemplateError::UnknownPlaceholder {
                template: template.name(),
                name: name.to_string(),
            });
        }
    }
    let lookup = |name: &str| values.iter().find(|(n, _)| *n == name).map(|(_, v)| *v);
    for &name in names {
        if lookup(name).is_none() {
            return Err(TemplateError::MissingValue {
                template: template.name(),
                name,
            });
        }
    }

    let text = template.text();
    let mut out = String::with_capacity(text.len() + values.iter().map(|(_, v)| v.len()).sum::<usize>());
    let mut rest = text;
    while let Some(pos) = rest.find('{') {
        out.push_str(&rest[..pos]);
        let tail = &rest[pos..];
        let hit = names.iter().find(|name| {
            tail.len() > name.len() + 1 && tail[1..].starts_with(**name) && tail.as_bytes()[name.len() + 1] == b'}'
        });
        match hit {
            Some(name) => {
                out.push_str(lookup(name).unwrap_or_default());
                rest = &tail[name.len() + 2..];
            }
            None => {
                out.push('{');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    Ok(out)
}
