use super::{Pos, Token};

/// Splits text into words, numbers and single punctuation characters.
///
/// A hyphen or apostrophe between two letters or digits stays inside the
/// word (`long-term`, `don't`). Between two digits, `.`, `,`, `:`, `/` and
/// `-` also stay inside (`3.5`, `10:30`, `2020-07-04`). Spans are character
/// offsets and the tokens come out untagged (`Pos::Other`).
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_alphanumeric() {
            i += 1;
            loop {
                while i < chars.len() && chars[i].is_alphanumeric() {
                    i += 1;
                }
                let (Some(&j), Some(&next)) = (chars.get(i), chars.get(i + 1)) else {
                    break;
                };
                let prev = chars[i - 1];
                let word_joiner = matches!(j, '-' | '\'' | '\u{2019}') && next.is_alphanumeric();
                let digit_joiner =
                    matches!(j, '.' | ',' | ':' | '/' | '-') && prev.is_ascii_digit() && next.is_ascii_digit();
                if word_joiner || digit_joiner {
                    i += 1;
                } else {
                    break;
                }
            }
        } else {
            i += 1;
        }
        tokens.push(Token {
            text: chars[start..i].iter().collect(),
            span: (start, i),
            pos: Pos::Other,
        });
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(s: &str) -> Vec<String> {
        tokenize(s).into_iter().map(|t| t.text).collect()
    }

    #[test]
    fn examples() {
        assert_eq!(texts("Dealing with Hiv and"), ["Dealing", "with", "Hiv", "and"]);
        assert!(texts("").is_empty());
        assert_eq!(texts("a,b"), ["a", ",", "b"]);
    }

    #[test]
    fn joiners() {
        assert_eq!(texts("don't stop long-term"), ["don't", "stop", "long-term"]);
        assert_eq!(texts("3.5 10:30 2020-07-04 1,000."), ["3.5", "10:30", "2020-07-04", "1,000", "."]);
        assert_eq!(texts("50% of $20"), ["50", "%", "of", "$", "20"]);
        assert_eq!(texts("HIV/AIDS - end"), ["HIV", "/", "AIDS", "-", "end"]);
        assert_eq!(texts("end-"), ["end", "-"]);
    }

    #[test]
    fn spans_are_char_offsets() {
        let text = "é a.";
        let toks = tokenize(text);
        assert_eq!(toks.iter().map(|t| t.span).collect::<Vec<_>>(), [(0, 1), (2, 3), (3, 4)]);
        for t in toks {
            assert_eq!(crate::nlp::char_slice(text, t.span), t.text);
        }
    }
}
