"""
TaskSelector - GUI Menu for Selecting an Ultralap Task

Version: 1.0

Description:
    One button per task; pressing it hands the task name to the callback, which
    swaps in the matching TaskRunnerUI panel.
"""

import tkinter as tk

TASK_BUTTONS = [
    ("validate", "1. Validate Config (group, fundamental domain, convergence)"),
    ("spectrum", "2. Wavelet Spectrum with Tail Bounds"),
    ("heat", "3. Heat Equation on a Time Grid"),
    ("kernel", "4. Heat Kernel Values"),
    ("sample", "5. Sample Jump Paths"),
    ("bvp", "6. Dirichlet / von Neumann Problem"),
]


class TaskSelector(tk.Frame):
    """
    Attributes:
        switch_callback (function): Called with the task name.
    """

    def __init__(self, master, switch_callback, *args, **kwargs):
        super().__init__(master, *args, **kwargs)
        self.switch_callback = switch_callback
        self.configure(bg='#e6f0fa')

        tk.Label(
            self,
            text="Select Task",
            font=("Helvetica", 16, "bold"),
            bg='#e6f0fa',
            fg='#003366'
        ).pack(pady=20)

        btn_style = {
            "font": ("Helvetica", 12),
            "width": 60,
            "bg": "#007acc",
            "fg": "white",
            "activebackground": "#005f99",
            "bd": 0,
            "relief": "flat",
            "pady": 6
        }

        for task, text in TASK_BUTTONS:
            tk.Button(
                self,
                text=text,
                command=lambda t=task: self.switch_callback(t),
                **btn_style
            ).pack(pady=4)
