/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace hcs {

// Ordered list of lowercase tokens with no whitespace, punctuation,
// leading '@' or leading '#'.
using TokenSeq = std::vector<std::string>;

enum class StopLevel { None, Light, Heavy, Custom };

std::string stop_level_name(StopLevel level);
StopLevel stop_level_from_name(std::string_view name);

class StopList {
public:
    static StopList none();
    // Built-in 48-word light list.
    static StopList light();
    // Heavy list is a config input loaded from a file; must contain every
    // word of the built-in light list.
    static StopList heavy(const std::string& path);
    static StopList from_words(StopLevel level, std::vector<std::string> words);

    StopLevel level() const { return level_; }
    const std::string& source_path() const { return source_path_; }
    bool contains(std::string_view token) const;
    std::size_t size() const { return words_.size(); }
    const std::set<std::string>& words() const { return words_; }

private:
    StopList(StopLevel level, std::set<std::string> words, std::string path)
        : level_(level), words_(std::move(words)), source_path_(std::move(path)) {}

    StopLevel level_;
    std::set<std::string> words_;
    std::string source_path_;
};

// Loads a custom stop list: UTF-8, one token per line, '#'-prefixed
// comment lines ignored, entries lowercased and deduplicated.
StopList load_stoplist(const std::string& path);

// Resolves a stop level against a directory holding heavy.txt.
StopList resolve_stoplist(StopLevel level, const std::string& stoplist_dir);

// Lowercases, removes a leading "RT:" retweet marker, drops @mention,
// #hashtag and URL tokens whole, strips punctuation, splits on whitespace.
TokenSeq normalize(std::string_view text);

// Removes every token contained in the list, preserving order.
TokenSeq remove_stopwords(const TokenSeq& tokens, const StopList& list);

std::string join_tokens(const TokenSeq& tokens);

} // namespace hcs
