//! Small hand-annotated examples used by the runnable examples, the tests and
//! the service's demo mode.

use crate::model::{
    AnswerAnnotation, Explanation, ExplanationLabel, PassageMention, Preposition, QedExample,
    ReferentialEquality, SentenceSpan, TextSpan,
};
use crate::text::split_sentences;

/// Creates an unannotated example with sentence boundaries computed by
/// [`split_sentences`]. The label defaults to `answer_only`.
pub fn unannotated(id: &str, title: &str, question: &str, passage: &str) -> QedExample {
    let sentence_boundaries = split_sentences(passage)
        .into_iter()
        .filter_map(|(s, e)| TextSpan::from_host(passage, s, e))
        .collect();
    QedExample {
        id: id.to_owned(),
        title: title.to_owned(),
        url: None,
        question: question.to_owned(),
        passage: passage.to_owned(),
        sentence_boundaries,
        label: ExplanationLabel::AnswerOnly,
        explanation: None,
        answers: Vec::new(),
    }
}

/// First occurrence of `needle` in the question.
///
/// # Panics
/// If `needle` does not occur.
pub fn q(ex: &QedExample, needle: &str) -> TextSpan {
    TextSpan::find(&ex.question, needle, 0)
        .unwrap_or_else(|| panic!("{needle:?} not in question of {}", ex.id))
}

/// First occurrence of `needle` in the passage.
///
/// # Panics
/// If `needle` does not occur.
pub fn p(ex: &QedExample, needle: &str) -> TextSpan {
    TextSpan::find(&ex.passage, needle, 0)
        .unwrap_or_else(|| panic!("{needle:?} not in passage of {}", ex.id))
}

/// The sentence boundary containing the first occurrence of `needle`.
pub fn sentence_with(ex: &QedExample, needle: &str) -> SentenceSpan {
    let span = p(ex, needle);
    let idx = ex
        .sentence_index_of(&span)
        .unwrap_or_else(|| panic!("{needle:?} crosses a sentence boundary"));
    SentenceSpan(ex.sentence_boundaries[idx].clone())
}

fn explain(
    mut ex: QedExample,
    sentence: SentenceSpan,
    equalities: Vec<ReferentialEquality>,
    answers: Vec<AnswerAnnotation>,
) -> QedExample {
    ex.label = ExplanationLabel::ValidExplanation;
    ex.explanation = Some(Explanation {
        selected_sentence: sentence,
        equalities,
        answers,
    });
    ex
}

/// "how many seats in university of michigan stadium": one pronoun
/// equality, answer needs no resolution.
pub fn michigan() -> QedExample {
    let ex = unannotated(
        "michigan-stadium",
        "Michigan Stadium",
        "how many seats in university of michigan stadium",
        "Michigan Stadium, nicknamed “The Big House”, is the football stadium for the \
         University of Michigan in Ann Arbor, Michigan. It is the largest stadium in the \
         United States, the second largest stadium in the world and the 34th largest sports \
         venue. Its official capacity is 107,601.",
    );
    let sentence = sentence_with(&ex, "Its official capacity");
    let eq = ReferentialEquality::new(
        q(&ex, "university of michigan stadium"),
        PassageMention::explicit(p(&ex, "Its")),
    );
    let answer = AnswerAnnotation::direct(p(&ex, "107,601"));
    explain(ex, sentence, vec![eq], vec![answer])
}

/// "who won wimbledon in 2019": two equalities and a pronoun answer
/// resolved to an earlier sentence.
pub fn wimbledon() -> QedExample {
    let ex = unannotated(
        "wimbledon-2019",
        "Simona Halep",
        "who won wimbledon in 2019",
        "Simona Halep is a female tennis player. She won Wimbledon in 2019.",
    );
    let sentence = sentence_with(&ex, "She won");
    let eqs = vec![
        ReferentialEquality::new(
            q(&ex, "wimbledon"),
            PassageMention::explicit(p(&ex, "Wimbledon")),
        ),
        ReferentialEquality::new(q(&ex, "2019"), PassageMention::explicit(p(&ex, "2019"))),
    ];
    let answer = AnswerAnnotation::resolved(p(&ex, "She"), p(&ex, "Simona Halep"));
    explain(ex, sentence, eqs, vec![answer])
}

/// "who wrote the film howl's moving castle".
pub fn howls_moving_castle() -> QedExample {
    let ex = unannotated(
        "howls-moving-castle",
        "Howl's Moving Castle (film)",
        "who wrote the film howl's moving castle",
        "Howl's Moving Castle is a 2004 Japanese animated fantasy film written and directed \
         by Hayao Miyazaki. It is based on the novel of the same name, which was written by \
         Diana Wynne Jones. The film was produced by Toshio Suzuki.",
    );
    let sentence = sentence_with(&ex, "Howl's Moving Castle is");
    let eq = ReferentialEquality::new(
        q(&ex, "the film howl's moving castle"),
        PassageMention::explicit(p(&ex, "Howl's Moving Castle")),
    );
    let answer = AnswerAnnotation::direct(p(&ex, "Hayao Miyazaki"));
    explain(ex, sentence, vec![eq], vec![answer])
}

/// Bridging to the whole sentence: the anthem was sung "[at Game 1 ...]".
pub fn world_series() -> QedExample {
    let ex = unannotated(
        "world-series-2017-game-1",
        "2017 World Series",
        "who sang the national anthem at the first game of 2017 world series",
        "Game 1 of the 2017 World Series: The ceremonial first pitch was thrown out by members \
         of former Dodger Jackie Robinson’s family, including his widow Rachel. The game marked \
         the 45th anniversary of Robinson’s death. Keith Williams Jr., a gospel singer, \
         performed “The Star-Spangled Banner”, the national anthem.",
    );
    let sentence = sentence_with(&ex, "Keith Williams Jr.");
    let eqs = vec![
        ReferentialEquality::new(
            q(&ex, "the national anthem"),
            PassageMention::explicit(p(&ex, "the national anthem")),
        ),
        ReferentialEquality::new(
            q(&ex, "the first game of 2017 world series"),
            PassageMention::ImplicitSentence {
                prep: Preposition::new("at"),
            },
        ),
    ];
    let answer = AnswerAnnotation::direct(p(&ex, "Keith Williams Jr."));
    explain(ex, sentence, eqs, vec![answer])
}

/// Bridging to a phrase: "the winner [of America's Got Talent season 11]".
pub fn americas_got_talent() -> QedExample {
    let ex = unannotated(
        "agt-season-11",
        "America's Got Talent (season 11)",
        "who won america's got talent season 11",
        "The 11th season of America's Got Talent, an American talent show competition, began \
         broadcasting in the United States during 2016. Grace VanderWaal was announced as the \
         winner on September 14, 2016.",
    );
    let sentence = sentence_with(&ex, "Grace VanderWaal");
    let eq = ReferentialEquality::new(
        q(&ex, "america's got talent season 11"),
        PassageMention::ImplicitPhrase {
            anchor: p(&ex, "the winner"),
            prep: Preposition::new("of"),
        },
    );
    let answer = AnswerAnnotation::direct(p(&ex, "Grace VanderWaal"));
    explain(ex, sentence, vec![eq], vec![answer])
}

/// An example whose answer is supported only by several sentences.
pub fn multi_sentence_answer() -> QedExample {
    let mut ex = unannotated(
        "and-then-there-were-none",
        "And Then There Were None",
        "where did they film and then there were none",
        "Filming began in July 2015. Cornwall was used for many of the harbour and beach \
         scenes, including Holywell Bay, Kynance Cove, and Mullion Cove. Harefield House in \
         Hillingdon, outside London, served as the location for the island mansion.",
    );
    let answer = AnswerAnnotation::direct(p(&ex, "Cornwall"));
    ex.answers = vec![answer];
    ex
}

/// An example whose passage holds no answer.
pub fn no_answer() -> QedExample {
    let mut ex = unannotated(
        "no-answer",
        "Tennis",
        "who won the first tennis match on the moon",
        "Tennis is a racket sport. It can be played individually or between two teams.",
    );
    ex.label = ExplanationLabel::NoAnswer;
    ex
}

/// Every sample in a fixed order.
pub fn all() -> Vec<QedExample> {
    vec![
        michigan(),
        wimbledon(),
        howls_moving_castle(),
        world_series(),
        americas_got_talent(),
        multi_sentence_answer(),
        no_answer(),
    ]
}
