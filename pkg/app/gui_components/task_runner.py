"""
TaskRunnerUI - GUI Panel for Running One Ultralap Task

Version: 1.0

Description:
    Lets the user pick an experiment config and an output directory, set the
    thread count and (for sampling) the seed, run the task and read its summary.
    Failures are shown in a message box together with the exit code the command
    line would report.
"""

import tkinter as tk
from tkinter import filedialog, messagebox
from tkinter.ttk import Label

from scripts.errors import EXIT_OK, EXIT_UNSUPPORTED, UltralapError
from scripts.tasks import run_task

TITLES = {
    "validate": "Validate Experiment Config",
    "spectrum": "Wavelet Spectrum",
    "heat": "Heat Equation",
    "kernel": "Heat Kernel",
    "sample": "Jump-Path Sampler",
    "bvp": "Boundary Value Problem",
}


class TaskRunnerUI(tk.Frame):
    """
    Attributes:
        task (str): Task run by the panel.
        config_file (tk.StringVar): Experiment config path.
        output_dir (tk.StringVar): Result directory; empty for the per-user default.
        threads (tk.StringVar): Worker thread count.
        seed (tk.StringVar): Sampler seed; empty keeps the config's seed.
        stats_label (tk.Label): Summary of the last run.
    """

    def __init__(self, master, task):
        super().__init__(master, bg="#e6f0fa")
        self.task = task
        self.config_file = tk.StringVar()
        self.output_dir = tk.StringVar()
        self.threads = tk.StringVar(value="1")
        self.seed = tk.StringVar()
        self.stats_label = None
        self._build_ui()

    def _build_ui(self):
        Label(
            self,
            text=TITLES[self.task],
            font=("Helvetica", 14, "bold"),
            background="#e6f0fa",
            foreground="#003366"
        ).pack(pady=10)

        self._create_path_selector("Experiment config (.json):", self.config_file, self.browse_config)
        self._create_path_selector("Output directory (optional):", self.output_dir, self.browse_output_dir)

        options = tk.Frame(self, bg="#e6f0fa")
        options.pack(pady=4)
        tk.Label(options, text="Threads:", font=("Helvetica", 10, "bold"), bg="#e6f0fa", fg="#003366").pack(side="left", padx=10)
        tk.Entry(options, textvariable=self.threads, width=4, font=("Helvetica", 10)).pack(side="left")
        if self.task == "sample":
            tk.Label(options, text="Seed:", font=("Helvetica", 10, "bold"), bg="#e6f0fa", fg="#003366").pack(side="left", padx=10)
            tk.Entry(options, textvariable=self.seed, width=8, font=("Helvetica", 10)).pack(side="left")

        tk.Button(
            self,
            text="Run",
            command=self.start_task,
            font=("Helvetica", 11, "bold"),
            bg="#007acc",
            fg="white",
            activebackground="#005f99",
            relief="flat",
            padx=10,
            pady=5
        ).pack(pady=10)

    def _create_path_selector(self, label_text, variable, browse_command):
        """Creates a labeled input field with a browse button."""
        container = tk.Frame(self, bg="#e6f0fa")
        container.pack(fill="x", padx=40, pady=8)

        tk.Label(
            container,
            text=label_text,
            font=("Helvetica", 11),
            bg="#e6f0fa",
            fg="#003366"
        ).pack(anchor="w", pady=(0, 4))

        entry_frame = tk.Frame(container, bg="#e0e0e0")
        entry_frame.pack(fill="x")

        tk.Entry(
            entry_frame,
            textvariable=variable,
            font=("Helvetica", 11),
            bg="#f8f8f8",
            fg="black",
            relief="flat",
            bd=0,
            insertbackground="#000000"
        ).pack(side="left", fill="x", expand=True, ipady=6, padx=(6, 4), pady=4)

        tk.Button(
            entry_frame,
            text="Browse",
            command=browse_command,
            font=("Helvetica", 10, "bold"),
            bg="#4a90e2",
            fg="white",
            activebackground="#2d6ca2",
            relief="flat",
            padx=10,
            pady=6
        ).pack(side="right", padx=(4, 6), pady=4)

    def browse_config(self):
        selected = filedialog.askopenfilename(filetypes=[["JSON Files", "*.json"]])
        if selected:
            self.config_file.set(selected)

    def browse_output_dir(self):
        selected = filedialog.askdirectory()
        if selected:
            self.output_dir.set(selected)

    def start_task(self):
        """Runs the task and reports success, unsupported data or the error."""
        config_path = self.config_file.get()
        if not config_path:
            messagebox.showwarning("Missing Input", "Please select an experiment config.")
            return
        try:
            threads = int(self.threads.get() or 1)
            seed = int(self.seed.get()) if self.seed.get() else None
        except ValueError:
            messagebox.showwarning("Invalid Input", "Threads and seed must be integers.")
            return

        try:
            result = run_task(self.task, config_path, self.output_dir.get() or None, threads, seed)
        except UltralapError as e:
            messagebox.showerror("Error", f"{type(e).__name__} (exit code {e.exit_code}):\n{e}")
            return
        except Exception as e:
            messagebox.showerror("Error", f"An error occurred:\n{str(e)}")
            return

        if result.exit_code == EXIT_OK:
            messagebox.showinfo("Success", f"Results saved to:\n{result.out_dir}")
        elif result.exit_code == EXIT_UNSUPPORTED:
            messagebox.showwarning("Unsupported", f"Initial data is not supported on the region.\nSee {result.out_dir}")
        else:
            messagebox.showwarning("Finished", f"Exit code {result.exit_code}, see {result.out_dir}")
        self.display_stats(result.summary)

    def display_stats(self, summary):
        if self.stats_label:
            self.stats_label.destroy()

        stat_text = f"📊 {TITLES[self.task]}:\n"
        for key, value in summary.items():
            if isinstance(value, float):
                value = f"{value:.6g}"
            stat_text += f"- {key}: {value}\n"

        self.stats_label = tk.Label(
            self,
            text=stat_text,
            font=("Courier", 10),
            bg="#e6f0fa",
            justify="left",
            fg="#003366"
        )
        self.stats_label.pack(pady=10)
