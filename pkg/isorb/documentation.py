from pylatexenc.latexencode import utf8tolatex
from isorb._version import __VERSION__


class ReportDocumentation(object):
    """Class for rendering a verification report as a LaTeX document"""

    def __init__(self, report):
        self.report = report

    def return_tex_documentation(self, test_version=None):
        if test_version is None:
            version = __VERSION__
        else:
            version = test_version
        metadata = self.report.metadata
        params = metadata.get("params", {})

        s = tex_top
        s += "\n\n"
        s += r"\title{Verification report}" + "\n"
        s += r"\author{isorb " + utf8tolatex(version) + "}\n"
        s += r"\date{" + utf8tolatex(str(metadata.get("timestamp") or "")) + "}\n"
        s += "\n"
        s += r"\begin{document}" + "\n\n"
        s += r"\maketitle" + "\n\n"

        s += r"\section{Run}" + "\n\n"
        s += r"\begin{description}" + "\n"
        for key in ("n", "p", "q"):
            if key in params:
                s += r"  \item[" + key + "] " + str(params[key]) + "\n"
        s += r"  \item[seed] " + str(metadata.get("seed", "")) + "\n"
        s += r"\end{description}" + "\n\n"

        s += r"\section{Checks}" + "\n\n"
        s += tex_table_top + "\n"
        for entry in self.report.checks:
            p = "      " + r"\texttt{" + utf8tolatex(entry.name) + "} & "
            p += utf8tolatex(entry.anchor) + " & "
            p += str(entry.sample_count) + " & "
            p += "{:.2e}".format(entry.max_residual) + " & "
            p += "{:.1e}".format(entry.tolerance) + " & "
            p += ("pass" if entry.passed else r"\textbf{FAIL}") + r" \\" + "\n"
            p += r"      \hline" + "\n"
            s += p
        s += tex_table_bot + "\n\n"

        failed = self.report.failed()
        s += r"\section{Summary}" + "\n\n"
        if failed:
            s += "{} of {} checks failed:\n".format(len(failed), len(self.report.checks))
            s += r"\begin{itemize}" + "\n"
            for entry in failed:
                s += r"  \item \texttt{" + utf8tolatex(entry.name) + "}"
                for note in entry.notes:
                    s += " " + utf8tolatex(note)
                s += "\n"
            s += r"\end{itemize}" + "\n\n"
        else:
            s += "All {} checks passed.\n\n".format(len(self.report.checks))

        nonisometry = self.report.info.get("nonisometry")
        if nonisometry is not None:
            certificate = nonisometry["certificate"]
            if certificate["outcome"] == "inequivalent":
                s += "The maps are inequivalent: "
                s += r"\texttt{" + utf8tolatex(certificate["witness"]) + "} takes the values "
                s += "{:.10g} and {:.10g}.\n".format(*certificate["values"])
            else:
                s += "No invariant separates the maps.\n"
            s += "\n"

        s += r"\end{document}"
        s += "\n"

        return s


tex_top = r"""\documentclass{article}
\usepackage[margin=1in]{geometry}
\usepackage{tabularx}"""


tex_table_top = r"""\begin{table}[h!]
  \begin{center}
    \begin{tabularx}{\linewidth}{|l|X|r|r|r|c|}
      \hline
      \textbf{Check} & \textbf{Property} & \textbf{Samples} & \textbf{Residual} &
      \textbf{Tolerance} & \textbf{Result} \\
      \hline"""

tex_table_bot = r"""    \end{tabularx}
  \end{center}
\end{table}"""
