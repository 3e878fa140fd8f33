use super::{NounPhrase, Pos, Token};

/// Groups maximal runs of adjacent noun tokens into phrases.
///
/// `singular` maps a plural head to its singular form; heads tagged NNS
/// without a known singular are kept as written (lowercased).
pub fn chunk_noun_phrases(tokens: &[Token], singular: impl Fn(&str) -> Option<String>) -> Vec<NounPhrase> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if !tokens[i].pos.is_noun() {
            i += 1;
            continue;
        }
        let start = i;
        while i < tokens.len() && tokens[i].pos.is_noun() {
            i += 1;
        }
        let run = &tokens[start..i];
        let last = &run[run.len() - 1];
        let lower = last.text.to_lowercase();
        let head = match last.pos {
            Pos::NNS => singular(&lower).unwrap_or(lower),
            _ => lower,
        };
        let mut key: Vec<String> = run[..run.len() - 1].iter().map(|t| t.text.to_lowercase()).collect();
        key.push(head.clone());
        let mut surface = String::new();
        for (k, t) in run.iter().enumerate() {
            if k > 0 && t.span.0 > run[k - 1].span.1 {
                surface.push(' ');
            }
            surface.push_str(&t.text);
        }
        out.push(NounPhrase {
            tokens: (start, i),
            span: (run[0].span.0, last.span.1),
            surface,
            head,
            key: key.join(" "),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlp::{tokenize, Lexicon, PosTagger, RuleTagger};

    fn phrases(text: &str) -> Vec<NounPhrase> {
        let tagger = RuleTagger::new(Lexicon::english());
        let mut toks = tokenize(text);
        let masked = vec![false; toks.len()];
        tagger.tag(&mut toks, &masked);
        chunk_noun_phrases(&toks, |w| tagger.singular(w))
    }

    #[test]
    fn compound_phrase_has_last_noun_as_head() {
        let p = phrases("liver disease");
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].head, "disease");
        assert_eq!(p[0].surface, "liver disease");
        assert_eq!(p[0].key, "liver disease");
        assert_eq!(p[0].tokens, (0, 2));
    }

    #[test]
    fn no_nouns_no_phrases() {
        assert!(phrases("and then it was not so").is_empty());
    }

    #[test]
    fn plural_heads_are_singularized() {
        let p = phrases("the viruses spread");
        assert_eq!(p[0].head, "virus");
        assert_eq!(p[0].surface, "viruses");
        let p = phrases("people");
        assert_eq!(p[0].head, "people");
    }

    #[test]
    fn punctuation_breaks_runs() {
        let p = phrases("life, virus");
        assert_eq!(p.len(), 2);
    }
}
