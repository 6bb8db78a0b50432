#include "ecoforge/netlogo_check.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <unordered_set>

namespace ecoforge::netlogo {

namespace {

const std::unordered_set<std::string_view>& primitives()
{
    static const std::unordered_set<std::string_view> words = {
        // structure
        "to", "to-report", "end", "report", "breed", "globals", "turtles-own", "patches-own", "links-own",
        "extensions",
        // control
        "if", "ifelse", "ifelse-value", "while", "repeat", "stop", "ask", "let", "set", "foreach", "run",
        // world
        "clear-all", "reset-ticks", "tick", "ticks", "setup-plots", "update-plots", "random-xcor", "random-ycor",
        "world-width", "world-height", "max-pxcor", "max-pycor", "min-pxcor", "min-pycor",
        // agents
        "turtles", "patches", "links", "turtle-set", "patch-set", "nobody", "self", "myself", "other",
        "neighbors", "neighbors4", "patch-here", "turtles-here", "turtles-on", "in-radius", "one-of", "n-of",
        "with", "of", "any?", "count", "die", "hatch", "sprout", "create-turtles", "who",
        // turtle variables and motion
        "xcor", "ycor", "heading", "setxy", "fd", "bk", "rt", "lt", "move-to", "color", "shape", "size",
        "hidden?", "pxcor", "pycor",
        // math and logic
        "and", "or", "not", "xor", "mod", "abs", "floor", "ceiling", "round", "precision", "sqrt", "sin", "cos",
        "exp", "ln", "max", "min", "sum", "mean", "list", "item", "length", "first", "last", "fput", "lput",
        "random", "random-float", "random-poisson", "random-normal", "random-exponential", "random-seed",
        "true", "false", "word", "show", "print", "type",
        // operators
        "+", "-", "*", "/", "^", "=", "!=", "<", ">", "<=", ">=",
    };
    return words;
}

const std::set<std::string_view> kDeclarations = {"globals", "turtles-own", "patches-own", "links-own",
                                                   "extensions", "breed"};

struct Token {
    std::string text; // lowercased
    int line;
};

std::vector<Token> tokenize(std::string_view src, std::vector<Problem>& problems)
{
    std::vector<Token> out;
    int line = 1;
    std::size_t i = 0;
    while (i < src.size()) {
        char c = src[i];
        if (c == '\n') {
            ++line;
            ++i;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == ';') {
            while (i < src.size() && src[i] != '\n')
                ++i;
        } else if (c == '"') {
            std::size_t j = i + 1;
            while (j < src.size() && src[j] != '"' && src[j] != '\n')
                j += (src[j] == '\\') ? 2 : 1;
            if (j >= src.size() || src[j] != '"')
                problems.push_back({line, "unterminated string"});
            out.push_back({"\"string\"", line});
            i = j + 1;
        } else if (c == '[' || c == ']' || c == '(' || c == ')') {
            out.push_back({std::string(1, c), line});
            ++i;
        } else {
            std::size_t j = i;
            while (j < src.size() && !std::isspace(static_cast<unsigned char>(src[j])) &&
                   std::string_view("[]();\"").find(src[j]) == std::string_view::npos)
                ++j;
            std::string word(src.substr(i, j - i));
            std::transform(word.begin(), word.end(), word.begin(),
                           [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
            out.push_back({std::move(word), line});
            i = j;
        }
    }
    return out;
}

bool is_number(std::string_view w)
{
    double v;
    auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    return ec == std::errc() && ptr == w.data() + w.size();
}

// Reads a [ ... ] list of plain words starting at tokens[i] == "[".
std::vector<std::string> word_list(const std::vector<Token>& tokens, std::size_t& i)
{
    std::vector<std::string> words;
    if (i >= tokens.size() || tokens[i].text != "[")
        return words;
    ++i;
    while (i < tokens.size() && tokens[i].text != "]")
        words.push_back(tokens[i++].text);
    if (i < tokens.size())
        ++i;
    return words;
}

} // namespace

std::string slugify(std::string_view label)
{
    std::string out;
    bool pending_dash = false;
    for (unsigned char c : label) {
        if (std::isalnum(c)) {
            if (pending_dash && !out.empty())
                out.push_back('-');
            pending_dash = false;
            out.push_back(static_cast<char>(std::tolower(c)));
        } else {
            pending_dash = true;
        }
    }
    return out;
}

std::string pluralize(std::string_view singular)
{
    std::string s(singular);
    auto ends = [&](std::string_view suffix) {
        return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (ends("s") || ends("x") || ends("z") || ends("ch") || ends("sh"))
        return s + "es";
    if (ends("y") && s.size() >= 2 && std::string_view("aeiou").find(s[s.size() - 2]) == std::string_view::npos)
        return s.substr(0, s.size() - 1) + "ies";
    return s + "s";
}

bool is_primitive(std::string_view word)
{
    return primitives().count(word) > 0;
}

std::vector<Problem> check_source(std::string_view source)
{
    std::vector<Problem> problems;
    auto tokens = tokenize(source, problems);

    // Pass 1: every declared name, wherever it is declared.
    std::unordered_set<std::string> declared;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto& t = tokens[i].text;
        if (t == "breed") {
            std::size_t j = i + 1;
            auto names = word_list(tokens, j);
            if (names.size() != 2) {
                problems.push_back({tokens[i].line, "breed needs [plural singular]"});
                continue;
            }
            const auto& p = names[0];
            const auto& s = names[1];
            for (std::string n : {p, s, "create-" + p, "hatch-" + p, "sprout-" + p, p + "-here", p + "-on",
                                  p + "-at", p + "-own", "is-" + s + "?"})
                declared.insert(n);
        } else if (t == "globals" || (t.size() > 4 && t.compare(t.size() - 4, 4, "-own") == 0)) {
            std::size_t j = i + 1;
            for (auto& n : word_list(tokens, j))
                declared.insert(n);
        } else if ((t == "to" || t == "to-report" || t == "let") && i + 1 < tokens.size()) {
            declared.insert(tokens[i + 1].text);
            if (t != "let" && i + 2 < tokens.size() && tokens[i + 2].text == "[") {
                std::size_t j = i + 2;
                for (auto& n : word_list(tokens, j))
                    declared.insert(n);
            }
        }
    }

    // Pass 2: structure and vocabulary.
    bool in_procedure = false;
    int brackets = 0;
    int parens = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto& tok = tokens[i];
        const auto& t = tok.text;
        if (!in_procedure) {
            if (kDeclarations.count(t) || (t.size() > 4 && t.compare(t.size() - 4, 4, "-own") == 0)) {
                ++i;
                if (i >= tokens.size() || tokens[i].text != "[") {
                    problems.push_back({tok.line, "declaration '" + t + "' needs a bracketed list"});
                    continue;
                }
                auto words = word_list(tokens, i);
                --i;
                if (i >= tokens.size() || tokens[i].text != "]")
                    problems.push_back({tok.line, "unterminated declaration '" + t + "'"});
                (void)words;
            } else if (t == "to" || t == "to-report") {
                in_procedure = true;
                brackets = parens = 0;
                ++i; // procedure name
                if (i + 1 < tokens.size() && tokens[i + 1].text == "[") {
                    ++i;
                    word_list(tokens, i);
                    --i;
                }
            } else {
                problems.push_back({tok.line, "unexpected '" + t + "' outside a procedure"});
            }
            continue;
        }

        if (t == "to" || t == "to-report") {
            problems.push_back({tok.line, "procedure opened inside another procedure"});
        } else if (t == "end") {
            if (brackets != 0)
                problems.push_back({tok.line, "unbalanced brackets in procedure"});
            if (parens != 0)
                problems.push_back({tok.line, "unbalanced parentheses in procedure"});
            in_procedure = false;
        } else if (t == "[") {
            ++brackets;
        } else if (t == "]") {
            if (--brackets < 0) {
                problems.push_back({tok.line, "unmatched ']'"});
                brackets = 0;
            }
        } else if (t == "(") {
            ++parens;
        } else if (t == ")") {
            if (--parens < 0) {
                problems.push_back({tok.line, "unmatched ')'"});
                parens = 0;
            }
        } else if (t != "\"string\"" && !is_number(t) && !is_primitive(t) && !declared.count(t)) {
            problems.push_back({tok.line, "unknown word '" + t + "'"});
        }
    }
    if (in_procedure)
        problems.push_back({tokens.empty() ? 1 : tokens.back().line, "procedure missing 'end'"});
    return problems;
}

} // namespace ecoforge::netlogo
