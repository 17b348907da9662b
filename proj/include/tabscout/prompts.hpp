#pragma once

#include <initializer_list>
#include <string>
#include <string_view>

namespace tabscout::prompts {

// Mirrors assets/prompts/*.v1.txt byte for byte (checked by the test suite).

inline constexpr std::string_view kParseQuestionV1 =
    "You are given a natural language question that corresponds to a SQL query. Your task is to infer the "
    "column names and the SQL query.\n"
    "\n"
    "Question:\n"
    "{question}\n"
    "\n"
    "Your output must:\n"
    "- In the first line, only contains column names in a single line separated by ' || '. For example, if you "
    "identify 3 columns, your output should be\n"
    "column name 1 || column name 2 || column name 3\n"
    "- In the second line, only contains the SQL query in a single line. Do not use \"FROM\" clause in the SQL "
    "query.\n"
    "- Not include any explanation, commentary, or extra text.\n";

inline constexpr std::string_view kJudgeAnswerableV1 =
    "I have the following question and table name and table column names.\n"
    "\n"
    "Question:\n"
    "{question}\n"
    "\n"
    "Table:\n"
    "    Table Name:\n"
    "    {table name}\n"
    "    Columns:\n"
    "    {relevant columns to the question}\n"
    "\n"
    "Can this question be translated into an SQL query on this table?\n"
    "- Note that the table may contain some columns that can be inferred from the question. If all the columns "
    "in the question can be inferred from the table, you should answer 'yes'.\n"
    "- Note that the table may lack some columns that are necessary to answer the question, which you should "
    "answer 'no'.\n"
    "Answer only 'yes' or 'no'.\n";

/// Authored template for the SQL-generation call that follows a 'yes' judgement.
inline constexpr std::string_view kGenerateSqlV1 =
    "Write one SQL query that answers the question using only the table and columns below.\n"
    "\n"
    "Question:\n"
    "{question}\n"
    "\n"
    "Table:\n"
    "    Table Name:\n"
    "    {table name}\n"
    "    Columns:\n"
    "    {columns}\n"
    "\n"
    "Rules:\n"
    "- Refer to the table exactly as \"{table name}\" (double-quoted) in the FROM clause.\n"
    "- Double-quote every column name.\n"
    "- Use ILIKE for case-insensitive string comparisons.\n"
    "- Output only the SQL query on a single line, with no explanation.\n"
    "- If the question cannot be answered from these columns, output only NONE.\n";

struct Binding {
    std::string_view placeholder;
    std::string_view value;
};

/// Single left-to-right pass over the template replacing every placeholder
/// occurrence. Substituted values are never re-scanned.
std::string render(std::string_view tmpl, std::initializer_list<Binding> bindings);

} // namespace tabscout::prompts
